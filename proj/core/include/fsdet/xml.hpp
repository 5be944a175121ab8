// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fsdet {

/// Error from the XML reader, carrying the 1-based line where parsing failed.
class XmlError : public std::runtime_error {
public:
    XmlError(const std::string& msg, int line)
        : std::runtime_error("XML error at line " + std::to_string(line) + ": " + msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Element tree with concatenated, trimmed text content. Attributes are
/// parsed for well-formedness but not retained; the VOC schema does not
/// use them.
struct XmlNode {
    std::string name;
    std::string text;
    std::vector<XmlNode> children;
    int line = 0;

    const XmlNode* child(const std::string& child_name) const;
    const XmlNode& require(const std::string& child_name) const;
    std::vector<const XmlNode*> children_named(const std::string& child_name) const;
    int require_int(const std::string& child_name) const;
};

/// Parses a standalone XML document (subset: elements, attributes, text,
/// comments, declarations, CDATA, the five predefined entities).
XmlNode parse_xml(const std::string& text);

/// Escapes `&<>"'` for element text.
std::string xml_escape(const std::string& s);

}  // namespace fsdet
