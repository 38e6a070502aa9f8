#pragma once

// Error-recovering HTML parser producing a value-semantics DOM, plus tag-path
// enumeration. Tolerates malformed markup; only undecodable bytes are fatal.

#include <string>
#include <vector>

#include "wfkit/common.hpp"

namespace wfkit {

struct HtmlNode {
    enum class Kind { Element, Text, Comment };
    Kind kind = Kind::Element;
    std::string tag;  // lowercased element name
    std::vector<std::pair<std::string, std::string>> attrs;  // first occurrence wins
    std::string text;  // text/comment content
    std::vector<HtmlNode> children;

    const std::string* attr(const std::string& name) const {
        for (const auto& [k, v] : attrs)
            if (k == name) return &v;
        return nullptr;
    }
};

struct DomTree {
    std::vector<HtmlNode> roots;
};

namespace detail {

inline bool is_void_element(const std::string& tag) {
    static const char* kVoid[] = {"area", "base",  "br",   "col",  "embed", "hr",    "img",
                                  "input", "link", "meta", "param", "source", "track", "wbr"};
    for (const char* v : kVoid)
        if (tag == v) return true;
    return false;
}

inline void validate_utf8(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t extra;
        if (c < 0x80) extra = 0;
        else if ((c & 0xe0) == 0xc0) extra = 1;
        else if ((c & 0xf0) == 0xe0) extra = 2;
        else if ((c & 0xf8) == 0xf0) extra = 3;
        else throw Error("encoding error: invalid UTF-8 lead byte at offset " + std::to_string(i));
        if (i + extra >= s.size() && extra > 0)
            throw Error("encoding error: truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k <= extra; ++k)
            if ((static_cast<unsigned char>(s[i + k]) & 0xc0) != 0x80)
                throw Error("encoding error: invalid UTF-8 continuation at offset " +
                            std::to_string(i + k));
        i += extra + 1;
    }
}

inline char lower(char c) { return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c; }

inline std::string to_lower(std::string s) {
    for (char& c : s) c = lower(c);
    return s;
}

inline bool is_name_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == ':' || c == '.';
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

struct Parser {
    const std::string& src;
    std::size_t pos = 0;
    std::vector<HtmlNode> roots;
    std::vector<std::size_t> open_path;  // chain of open elements as child
                                         // indices (pointers would dangle when
                                         // sibling vectors reallocate)

    HtmlNode* node_at(const std::vector<std::size_t>& path) {
        if (path.empty()) return nullptr;
        HtmlNode* n = &roots[path[0]];
        for (std::size_t i = 1; i < path.size(); ++i) n = &n->children[path[i]];
        return n;
    }

    void append(HtmlNode&& node, bool push_open) {
        HtmlNode* parent = node_at(open_path);
        std::vector<HtmlNode>& list = parent ? parent->children : roots;
        list.push_back(std::move(node));
        if (push_open) open_path.push_back(list.size() - 1);
    }

    void append_text(const std::string& text) {
        if (text.empty()) return;
        HtmlNode n;
        n.kind = HtmlNode::Kind::Text;
        n.text = text;
        append(std::move(n), false);
    }

    void close_tag(const std::string& name) {
        // find the innermost matching open element; unmatched closers are ignored
        std::vector<std::size_t> probe;
        for (std::size_t d = open_path.size(); d > 0; --d) {
            probe.assign(open_path.begin(), open_path.begin() + static_cast<long>(d));
            HtmlNode* n = node_at(probe);
            if (n && n->tag == name) {
                open_path.resize(d - 1);  // auto-closes everything above
                return;
            }
        }
    }

    void parse_tag() {
        std::size_t start = pos;  // at '<'
        ++pos;
        if (pos < src.size() && src[pos] == '!') {
            if (src.compare(pos + 1, 2, "--") == 0) {
                // comment: <!-- ... -->
                pos += 3;  // past "!--"
                std::size_t end = src.find("-->", pos);
                HtmlNode n;
                n.kind = HtmlNode::Kind::Comment;
                if (end == std::string::npos) {
                    n.text = src.substr(pos);
                    pos = src.size();
                } else {
                    n.text = src.substr(pos, end - pos);
                    pos = end + 3;
                }
                append(std::move(n), false);
            } else {
                // doctype or other declaration: skip to '>'
                std::size_t end = src.find('>', pos);
                pos = end == std::string::npos ? src.size() : end + 1;
            }
            return;
        }
        if (pos < src.size() && src[pos] == '?') {  // processing instruction
            std::size_t end = src.find('>', pos);
            pos = end == std::string::npos ? src.size() : end + 1;
            return;
        }
        bool closing = false;
        if (pos < src.size() && src[pos] == '/') {
            closing = true;
            ++pos;
        }
        if (pos >= src.size() || !is_name_start(src[pos])) {
            // stray '<': literal text
            append_text(src.substr(start, pos - start + (pos < src.size() ? 1 : 0)));
            if (pos < src.size()) ++pos;
            return;
        }
        std::string name;
        while (pos < src.size() && is_name_char(src[pos])) name.push_back(lower(src[pos++]));
        if (closing) {
            std::size_t end = src.find('>', pos);
            pos = end == std::string::npos ? src.size() : end + 1;
            close_tag(name);
            return;
        }
        HtmlNode node;
        node.kind = HtmlNode::Kind::Element;
        node.tag = name;
        bool self_close = false;
        while (pos < src.size()) {
            while (pos < src.size() && is_space(src[pos])) ++pos;
            if (pos >= src.size()) break;
            if (src[pos] == '>') {
                ++pos;
                break;
            }
            if (src[pos] == '/') {
                ++pos;
                if (pos < src.size() && src[pos] == '>') {
                    ++pos;
                    self_close = true;
                    break;
                }
                continue;
            }
            // attribute
            std::string aname;
            while (pos < src.size() && !is_space(src[pos]) && src[pos] != '=' && src[pos] != '>' &&
                   src[pos] != '/')
                aname.push_back(lower(src[pos++]));
            if (aname.empty()) {
                ++pos;
                continue;
            }
            std::string avalue;
            while (pos < src.size() && is_space(src[pos])) ++pos;
            if (pos < src.size() && src[pos] == '=') {
                ++pos;
                while (pos < src.size() && is_space(src[pos])) ++pos;
                if (pos < src.size() && (src[pos] == '"' || src[pos] == '\'')) {
                    char q = src[pos++];
                    std::size_t end = src.find(q, pos);
                    if (end == std::string::npos) {
                        avalue = src.substr(pos);
                        pos = src.size();
                    } else {
                        avalue = src.substr(pos, end - pos);
                        pos = end + 1;
                    }
                } else {
                    while (pos < src.size() && !is_space(src[pos]) && src[pos] != '>')
                        avalue.push_back(src[pos++]);
                }
            }
            if (!node.attr(aname)) node.attrs.emplace_back(aname, avalue);
        }
        bool raw_text = name == "script" || name == "style";
        bool container = !self_close && !is_void_element(name) && !raw_text;
        if (raw_text && !self_close) {
            // swallow everything up to the matching case-insensitive close tag
            std::string needle = "</" + name;
            std::size_t end = std::string::npos;
            for (std::size_t i = pos; i + needle.size() <= src.size(); ++i) {
                bool match = true;
                for (std::size_t k = 0; k < needle.size(); ++k)
                    if (lower(src[i + k]) != needle[k]) {
                        match = false;
                        break;
                    }
                if (match) {
                    end = i;
                    break;
                }
            }
            std::string content;
            if (end == std::string::npos) {
                content = src.substr(pos);
                pos = src.size();
            } else {
                content = src.substr(pos, end - pos);
                std::size_t close_end = src.find('>', end);
                pos = close_end == std::string::npos ? src.size() : close_end + 1;
            }
            if (!content.empty()) {
                HtmlNode t;
                t.kind = HtmlNode::Kind::Text;
                t.text = std::move(content);
                node.children.push_back(std::move(t));
            }
            append(std::move(node), false);
            return;
        }
        append(std::move(node), container);
    }

    void run() {
        while (pos < src.size()) {
            if (src[pos] == '<') {
                parse_tag();
            } else {
                std::size_t next = src.find('<', pos);
                if (next == std::string::npos) next = src.size();
                append_text(src.substr(pos, next - pos));
                pos = next;
            }
        }
    }
};

}  // namespace detail

inline DomTree parse_html(const std::string& bytes) {
    detail::validate_utf8(bytes);
    detail::Parser p{bytes};
    p.run();
    DomTree t;
    t.roots = std::move(p.roots);
    return t;
}

// One path per element: the chain of ancestor tag names ending at the element,
// in document order. Path depth = chain length.
inline std::vector<std::vector<std::string>> tag_paths(const DomTree& dom) {
    std::vector<std::vector<std::string>> paths;
    std::vector<std::string> chain;
    auto walk = [&](auto&& self, const HtmlNode& n) -> void {
        if (n.kind != HtmlNode::Kind::Element) return;
        chain.push_back(n.tag);
        paths.push_back(chain);
        for (const HtmlNode& c : n.children) self(self, c);
        chain.pop_back();
    };
    for (const HtmlNode& r : dom.roots) walk(walk, r);
    return paths;
}

inline std::string join_path(const std::vector<std::string>& path) {
    std::string s;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) s.push_back('/');
        s += path[i];
    }
    return s;
}

}  // namespace wfkit
