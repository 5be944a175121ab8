// SPDX-License-Identifier: Apache-2.0
#include "fsdet/xml.hpp"

#include <cctype>

namespace fsdet {

const XmlNode* XmlNode::child(const std::string& child_name) const {
    for (const auto& c : children)
        if (c.name == child_name) return &c;
    return nullptr;
}

const XmlNode& XmlNode::require(const std::string& child_name) const {
    const XmlNode* c = child(child_name);
    if (!c) throw XmlError("<" + name + "> is missing <" + child_name + ">", line);
    return *c;
}

std::vector<const XmlNode*> XmlNode::children_named(const std::string& child_name) const {
    std::vector<const XmlNode*> out;
    for (const auto& c : children)
        if (c.name == child_name) out.push_back(&c);
    return out;
}

int XmlNode::require_int(const std::string& child_name) const {
    const XmlNode& c = require(child_name);
    try {
        std::size_t pos = 0;
        // VOC tools occasionally emit float-formatted integers
        const double v = std::stod(c.text, &pos);
        if (pos != c.text.size()) throw std::invalid_argument("trailing garbage");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw XmlError("<" + child_name + "> is not a number: '" + c.text + "'", c.line);
    }
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    XmlNode parse_document() {
        skip_misc();
        if (eof()) fail("document has no root element");
        XmlNode root = parse_element();
        skip_misc();
        if (!eof()) fail("content after root element");
        return root;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
    int line_ = 1;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    char get() {
        char c = s_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }
    bool starts_with(const char* lit) const { return s_.compare(pos_, std::char_traits<char>::length(lit), lit) == 0; }

    [[noreturn]] void fail(const std::string& msg) const { throw XmlError(msg, line_); }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
    }

    void skip_until(const char* lit, const char* what) {
        while (!eof()) {
            if (starts_with(lit)) {
                for (const char* p = lit; *p; ++p) get();
                return;
            }
            get();
        }
        fail(std::string("unterminated ") + what);
    }

    // whitespace, comments, declarations, doctype
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_until("-->", "comment");
            } else if (starts_with("<?")) {
                skip_until("?>", "processing instruction");
            } else if (starts_with("<!DOCTYPE")) {
                skip_until(">", "DOCTYPE");
            } else {
                return;
            }
        }
    }

    std::string parse_name() {
        std::string name;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                c == '.' || c == ':') {
                name += get();
            } else {
                break;
            }
        }
        if (name.empty()) fail("expected a name");
        return name;
    }

    void parse_attributes() {
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated start tag");
            char c = peek();
            if (c == '>' || c == '/') return;
            parse_name();
            skip_ws();
            if (eof() || peek() != '=') fail("attribute without '='");
            get();
            skip_ws();
            if (eof() || (peek() != '"' && peek() != '\'')) fail("unquoted attribute value");
            const char quote = get();
            while (!eof() && peek() != quote) get();
            if (eof()) fail("unterminated attribute value");
            get();
        }
    }

    std::string decode_entity() {
        // at '&'
        get();
        std::string ent;
        while (!eof() && peek() != ';' && ent.size() < 8) ent += get();
        if (eof() || peek() != ';') fail("malformed entity reference");
        get();
        if (ent == "lt") return "<";
        if (ent == "gt") return ">";
        if (ent == "amp") return "&";
        if (ent == "quot") return "\"";
        if (ent == "apos") return "'";
        if (!ent.empty() && ent[0] == '#') {
            try {
                const long code = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                                      ? std::stol(ent.substr(2), nullptr, 16)
                                      : std::stol(ent.substr(1));
                if (code < 1 || code > 127) fail("non-ASCII character reference '&" + ent + ";'");
                return std::string(1, static_cast<char>(code));
            } catch (const XmlError&) {
                throw;
            } catch (const std::exception&) {
                fail("malformed character reference '&" + ent + ";'");
            }
        }
        fail("unknown entity '&" + ent + ";'");
    }

    static void trim(std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        s = s.substr(b, e - b);
    }

    XmlNode parse_element() {
        if (peek() != '<') fail("expected '<'");
        get();
        XmlNode node;
        node.line = line_;
        node.name = parse_name();
        parse_attributes();
        if (peek() == '/') {
            get();
            if (eof() || get() != '>') fail("malformed empty-element tag");
            return node;
        }
        get();  // '>'
        std::string text;
        for (;;) {
            if (eof()) fail("unterminated element <" + node.name + ">");
            char c = peek();
            if (c == '<') {
                if (starts_with("<!--")) {
                    skip_until("-->", "comment");
                } else if (starts_with("<![CDATA[")) {
                    for (int i = 0; i < 9; ++i) get();
                    while (!eof() && !starts_with("]]>")) text += get();
                    if (eof()) fail("unterminated CDATA section");
                    for (int i = 0; i < 3; ++i) get();
                } else if (starts_with("</")) {
                    get();
                    get();
                    const int close_line = line_;
                    const std::string close = parse_name();
                    if (close != node.name)
                        throw XmlError("mismatched closing tag </" + close + "> for <" +
                                           node.name + ">",
                                       close_line);
                    skip_ws();
                    if (eof() || get() != '>') fail("malformed closing tag");
                    trim(text);
                    node.text = std::move(text);
                    return node;
                } else {
                    node.children.push_back(parse_element());
                }
            } else if (c == '&') {
                text += decode_entity();
            } else {
                text += get();
            }
        }
    }
};

}  // namespace

XmlNode parse_xml(const std::string& text) { return Parser(text).parse_document(); }

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace fsdet
