#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>

#include "wfkit/html.hpp"

using namespace wfkit;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string all_text(const std::vector<HtmlNode>& nodes) {
    std::string s;
    for (const HtmlNode& n : nodes) {
        if (n.kind == HtmlNode::Kind::Text) s += n.text;
        s += all_text(n.children);
    }
    return s;
}

}  // namespace

TEST_CASE("nested document yields one path per element in document order") {
    DomTree dom = parse_html("<div><a><img></a></div><img>");
    std::vector<std::vector<std::string>> paths = tag_paths(dom);
    REQUIRE(paths.size() == 4);
    CHECK(join_path(paths[0]) == "div");
    CHECK(join_path(paths[1]) == "div/a");
    CHECK(join_path(paths[2]) == "div/a/img");
    CHECK(join_path(paths[3]) == "img");
    std::size_t max_depth = 0;
    for (const auto& p : paths) max_depth = std::max(max_depth, p.size());
    CHECK(max_depth == 3);
}

TEST_CASE("well-formed markup parses into the expected tree") {
    DomTree dom = parse_html("<html><body><p>hi</p></body></html>");
    REQUIRE(dom.roots.size() == 1);
    const HtmlNode& html = dom.roots[0];
    CHECK(html.tag == "html");
    REQUIRE(html.children.size() == 1);
    const HtmlNode& body = html.children[0];
    CHECK(body.tag == "body");
    REQUIRE(body.children.size() == 1);
    const HtmlNode& p = body.children[0];
    CHECK(p.tag == "p");
    REQUIRE(p.children.size() == 1);
    CHECK(p.children[0].kind == HtmlNode::Kind::Text);
    CHECK(p.children[0].text == "hi");
}

TEST_CASE("tag and attribute names fold to lowercase, values survive intact") {
    DomTree dom = parse_html(R"(<DIV Class="Navbar Main" ID=top hidden>)");
    REQUIRE(dom.roots.size() == 1);
    const HtmlNode& div = dom.roots[0];
    CHECK(div.tag == "div");
    REQUIRE(div.attr("class") != nullptr);
    CHECK(*div.attr("class") == "Navbar Main");
    REQUIRE(div.attr("id") != nullptr);
    CHECK(*div.attr("id") == "top");
    REQUIRE(div.attr("hidden") != nullptr);
    CHECK(div.attr("hidden")->empty());
    CHECK(div.attr("missing") == nullptr);
}

TEST_CASE("first attribute occurrence wins and quoting styles mix") {
    DomTree dom = parse_html("<a href=\"first\" href='second' rel=nofollow>");
    const HtmlNode& a = dom.roots[0];
    CHECK(*a.attr("href") == "first");
    CHECK(*a.attr("rel") == "nofollow");
}

TEST_CASE("void and self-closed elements take no children") {
    DomTree dom = parse_html("<br>after<div/>tail");
    REQUIRE(dom.roots.size() == 4);
    CHECK(dom.roots[0].tag == "br");
    CHECK(dom.roots[0].children.empty());
    CHECK(dom.roots[1].text == "after");
    CHECK(dom.roots[2].tag == "div");
    CHECK(dom.roots[2].children.empty());
    CHECK(dom.roots[3].text == "tail");
}

TEST_CASE("malformed markup recovers instead of failing") {
    SECTION("unmatched closers are ignored") {
        DomTree dom = parse_html("</p><b>x</b>");
        REQUIRE(dom.roots.size() == 1);
        CHECK(dom.roots[0].tag == "b");
    }
    SECTION("closing an ancestor auto-closes everything inside it") {
        DomTree dom = parse_html("<div><span>x</div>y");
        REQUIRE(dom.roots.size() == 2);
        CHECK(dom.roots[0].tag == "div");
        REQUIRE(dom.roots[0].children.size() == 1);
        CHECK(dom.roots[0].children[0].tag == "span");
        CHECK(dom.roots[1].kind == HtmlNode::Kind::Text);
        CHECK(dom.roots[1].text == "y");
    }
    SECTION("an unclosed element still appears with its content") {
        DomTree dom = parse_html("<p>dangling");
        REQUIRE(dom.roots.size() == 1);
        CHECK(dom.roots[0].tag == "p");
        REQUIRE(dom.roots[0].children.size() == 1);
        CHECK(dom.roots[0].children[0].text == "dangling");
    }
    SECTION("a stray angle bracket is literal text") {
        DomTree dom = parse_html("1 < 2");
        CHECK(tag_paths(dom).empty());
        CHECK(all_text(dom.roots) == "1 < 2");
    }
}

TEST_CASE("comments, doctype, and processing instructions") {
    DomTree dom = parse_html("<!doctype html><!-- note --><?xml x?><p>t</p>");
    REQUIRE(dom.roots.size() == 2);
    CHECK(dom.roots[0].kind == HtmlNode::Kind::Comment);
    CHECK(dom.roots[0].text == " note ");
    CHECK(dom.roots[1].tag == "p");
    CHECK(tag_paths(dom).size() == 1);

    DomTree open_comment = parse_html("<!-- never closed <b>");
    REQUIRE(open_comment.roots.size() == 1);
    CHECK(open_comment.roots[0].kind == HtmlNode::Kind::Comment);
    CHECK(open_comment.roots[0].text == " never closed <b>");
}

TEST_CASE("script bodies are raw text, closed case-insensitively") {
    DomTree dom = parse_html("<script>if (a<b) go();</SCRIPT><p>x</p>");
    REQUIRE(dom.roots.size() == 2);
    const HtmlNode& script = dom.roots[0];
    CHECK(script.tag == "script");
    REQUIRE(script.children.size() == 1);
    CHECK(script.children[0].kind == HtmlNode::Kind::Text);
    CHECK(script.children[0].text == "if (a<b) go();");
    CHECK(dom.roots[1].tag == "p");
    // the swallowed body contributes no element paths
    CHECK(tag_paths(dom).size() == 2);
}

TEST_CASE("input must be valid UTF-8") {
    CHECK_THROWS_WITH(parse_html("\xff"), ContainsSubstring("invalid UTF-8 lead byte at offset 0"));
    CHECK_THROWS_WITH(parse_html("caf\xc3"), ContainsSubstring("truncated UTF-8 sequence at offset 3"));
    CHECK_THROWS_WITH(parse_html("\xc3\x28"), ContainsSubstring("invalid UTF-8 continuation at offset 1"));
    CHECK_NOTHROW(parse_html("<p>caf\xc3\xa9 \xe2\x9c\x93</p>"));
}

TEST_CASE("join_path formatting") {
    CHECK(join_path({"div", "a", "img"}) == "div/a/img");
    CHECK(join_path({"html"}) == "html");
    CHECK(join_path({}).empty());
}
