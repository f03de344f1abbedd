// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "gatekeeper/error.hpp"
#include "gatekeeper/extractor.hpp"

using namespace gatekeeper;
using namespace gatekeeper::extractor;

namespace fs = std::filesystem;

namespace {

struct TempTree {
    fs::path root;

    TempTree() {
        root = fs::temp_directory_path() /
               ("gatekeeper_extract_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(root);
    }
    ~TempTree() { fs::remove_all(root); }

    static int& counter() {
        static int c = 0;
        return c;
    }

    fs::path write(const std::string& rel, const std::string& content) {
        const fs::path p = root / rel;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }
};

}  // namespace

TEST_CASE("scan_tree filters by extension and sorts") {
    TempTree tree;
    tree.write("b.ts", "");
    tree.write("a.py", "");
    tree.write("c.txt", "irrelevant");
    tree.write("nested/d.js", "");
    tree.write("nested/deeper/e.mjs", "");
    tree.write("nested/f.tsx", "");
    tree.write("README.md", "");

    auto files = scan_tree(tree.root);
    REQUIRE(files.size() == 5);
    CHECK(files[0].filename() == "a.py");
    CHECK(files[1].filename() == "b.ts");
    // lexicographic over the full path: nested/* after top-level files
    CHECK(files[2].filename() == "d.js");
    CHECK(files[3].filename() == "e.mjs");
    CHECK(files[4].filename() == "f.tsx");

    CHECK(scan_tree(tree.root / "nested").size() == 3);
    CHECK_THROWS_AS(scan_tree(tree.root / "missing"), Error);
}

TEST_CASE("scan_tree of an empty directory is empty") {
    TempTree tree;
    CHECK(scan_tree(tree.root).empty());
}

TEST_CASE("python decorator with docstring extracts the description") {
    const std::string source =
        "from fastmcp import FastMCP\n"
        "server = FastMCP(\"demo\")\n"
        "\n"
        "@server.tool()\n"
        "def add(a: int, b: int) -> int:\n"
        "    \"\"\"Adds two integers.\"\"\"\n"
        "    return a + b\n";
    auto result = extract_from_text(source, FileKind::Python, default_patterns(), "demo.py");
    REQUIRE(result.tools.size() == 1);
    CHECK(result.tools[0].description == "Adds two integers.");
    CHECK(result.tools[0].name == "add");
    CHECK(result.tools[0].line == 4);
    CHECK(result.tools[0].pattern == "py-server-tool-decorator");
}

TEST_CASE("typescript @Tool decorator extracts name and description") {
    const std::string source =
        "import { Tool } from \"sdk\";\n"
        "\n"
        "@Tool({name: \"sum\", description: \"Adds numbers\"})\n"
        "export class SumTool {}\n";
    auto result = extract_from_text(source, FileKind::TypeScript, default_patterns(), "sum.ts");
    REQUIRE(result.tools.size() == 1);
    CHECK(result.tools[0].name == "sum");
    CHECK(result.tools[0].description == "Adds numbers");
    CHECK(result.tools[0].line == 3);
}

TEST_CASE("files without pattern hits extract nothing") {
    auto result = extract_from_text("const x = 1;\n", FileKind::JavaScript, default_patterns());
    CHECK(result.tools.empty());
    CHECK(result.warnings.empty());
}

TEST_CASE("a tools array yields one tool per object") {
    const std::string source =
        "const server = {\n"
        "  tools: [\n"
        "    {name: \"read\", description: \"Reads a file\"},\n"
        "    {name: \"write\", description: \"Writes a file\"},\n"
        "    {name: \"nameless\"},\n"
        "  ],\n"
        "};\n";
    auto result = extract_from_text(source, FileKind::JavaScript, default_patterns(), "t.js");
    REQUIRE(result.tools.size() == 2);
    CHECK(result.tools[0].name == "read");
    CHECK(result.tools[0].description == "Reads a file");
    CHECK(result.tools[1].name == "write");
    CHECK(result.tools[1].description == "Writes a file");
}

TEST_CASE("json-style tools arrays inside code are extracted") {
    const std::string source =
        "SCHEMA = '''ignored'''\n"
        "CONFIG = {\n"
        "    \"tools\": [\n"
        "        {\"name\": \"ping\", \"description\": \"Checks connectivity\"}\n"
        "    ]\n"
        "}\n";
    auto result = extract_from_text(source, FileKind::Python, default_patterns(), "cfg.py");
    REQUIRE(result.tools.size() == 1);
    CHECK(result.tools[0].name == "ping");
    CHECK(result.tools[0].description == "Checks connectivity");
    CHECK(result.tools[0].pattern == "json-tools-array");
}

TEST_CASE("overlapping anchors do not double-extract the same payload") {
    // "@server.tool(" also contains "server.tool(": both patterns anchor here,
    // but the docstring and the description key are distinct payloads only if
    // both exist. With a description kwarg and no docstring, exactly one row
    // must come out.
    const std::string source =
        "@server.tool(description=\"Fetches a record\")\n"
        "def fetch():\n"
        "    return 1\n";
    auto result = extract_from_text(source, FileKind::Python, default_patterns(), "f.py");
    REQUIRE(result.tools.size() == 1);
    CHECK(result.tools[0].description == "Fetches a record");
}

TEST_CASE("triple-quoted and multi-line docstrings are unescaped and trimmed") {
    const std::string source =
        "@mcp.tool()\n"
        "def report() -> dict[str, int]:\n"
        "    '''\n"
        "    Builds the weekly report.\n"
        "    Includes \\\"quoted\\\" totals.\n"
        "    '''\n"
        "    pass\n";
    auto result = extract_from_text(source, FileKind::Python, default_patterns(), "r.py");
    REQUIRE(result.tools.size() == 1);
    CHECK(result.tools[0].description ==
          "Builds the weekly report.\n    Includes \"quoted\" totals.");
    CHECK(result.tools[0].name == "report");
}

TEST_CASE("template literals work as description values") {
    const std::string source =
        "registerTool({\n"
        "  name: `lookup`,\n"
        "  description: `Searches the\nindex`,\n"
        "});\n";
    auto result = extract_from_text(source, FileKind::TypeScript, default_patterns(), "l.ts");
    REQUIRE(result.tools.size() == 1);
    CHECK(result.tools[0].name == "lookup");
    CHECK(result.tools[0].description == "Searches the\nindex");
}

TEST_CASE("extraction is pure: identical bytes give identical results") {
    const std::string source =
        "@app.tool()\n"
        "def one():\n"
        "    \"first tool\"\n"
        "\n"
        "new Tool({name: \"x\", description: \"not python but matched textually\"})\n";
    auto a = extract_from_text(source, FileKind::Python, default_patterns(), "p.py");
    auto b = extract_from_text(source, FileKind::Python, default_patterns(), "p.py");
    REQUIRE(a.tools.size() == b.tools.size());
    for (size_t i = 0; i < a.tools.size(); ++i) {
        CHECK(a.tools[i].description == b.tools[i].description);
        CHECK(a.tools[i].line == b.tools[i].line);
    }
}

TEST_CASE("the recorded line contains the anchor text") {
    const std::string source =
        "# prologue\n"
        "\n"
        "@server.tool()\n"
        "def locate(city):\n"
        "    \"\"\"Geocodes a city name.\"\"\"\n";
    auto result = extract_from_text(source, FileKind::Python, default_patterns(), "geo.py");
    REQUIRE(result.tools.size() == 1);
    std::istringstream lines(source);
    std::string line;
    for (int i = 0; i < result.tools[0].line; ++i) std::getline(lines, line);
    CHECK(line.find("@server.tool(") != std::string::npos);
}

TEST_CASE("descriptions never contain raw source string delimiters") {
    const std::string source =
        "@server.tool()\n"
        "def q():\n"
        "    \"\"\"Say \\\"hi\\\" to 'them' nicely.\"\"\"\n";
    auto result = extract_from_text(source, FileKind::Python, default_patterns(), "q.py");
    REQUIRE(result.tools.size() == 1);
    CHECK(result.tools[0].description.find("\\\"") == std::string::npos);
    CHECK(result.tools[0].description.find("\"\"\"") == std::string::npos);
}

TEST_CASE("invalid UTF-8 files are skipped with a warning") {
    std::string bogus = "@server.tool()\ndef x():\n    \"doc\"\n";
    bogus += '\xff';
    bogus += '\xfe';
    auto result = extract_from_text(bogus, FileKind::Python, default_patterns(), "bad.py");
    CHECK(result.tools.empty());
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("bad.py") != std::string::npos);
}

TEST_CASE("extract_tools reads from disk") {
    TempTree tree;
    const auto file = tree.write(
        "weather.py",
        "@server.tool()\n"
        "def weather(city: str) -> str:\n"
        "    \"\"\"Fetches current weather for a city.\"\"\"\n");
    auto result = extract_tools(file, default_patterns());
    REQUIRE(result.tools.size() == 1);
    CHECK(result.tools[0].file == file);
    CHECK_THROWS_AS(extract_tools(tree.root / "nope.py", default_patterns()), Error);
    CHECK_THROWS_AS(extract_tools(tree.write("x.txt", ""), default_patterns()), Error);
}

TEST_CASE("to_corpus deduplicates identical descriptions") {
    std::vector<ExtractedTool> tools;
    for (int i = 0; i < 3; ++i) {
        ExtractedTool t;
        t.name = "tool" + std::to_string(i);
        t.description = i < 2 ? "same text" : "different text";
        t.file = "a.py";
        t.line = i + 1;
        t.pattern = "py-tool-decorator";
        tools.push_back(t);
    }
    LabelTaxonomy tax{{"benign"}, "benign"};
    Corpus c = to_corpus(tools, "benign", tax);
    CHECK(c.samples.size() == 2);
    CHECK(c.samples[0].origin == Origin::Scraped);
    CHECK(c.samples[0].source == "a.py:1");
    CHECK(*c.samples[0].label == "benign");

    CHECK(to_corpus({}, "benign", tax).samples.empty());
    CHECK_THROWS_AS(to_corpus(tools, "missing", tax), Error);
}

TEST_CASE("to_corpus keeps ten distinct tools as ten samples") {
    std::vector<ExtractedTool> tools;
    for (int i = 0; i < 10; ++i) {
        ExtractedTool t;
        t.description = "описание tool variant number " + std::to_string(i);
        t.file = "b.ts";
        t.line = i + 1;
        t.pattern = "ts-tool-decorator";
        tools.push_back(t);
    }
    LabelTaxonomy tax{{"benign"}, "benign"};
    CHECK(to_corpus(tools, "benign", tax).samples.size() == 10);
}

TEST_CASE("the bundled pattern file equals the compiled-in pack") {
    auto from_file =
        load_patterns(std::filesystem::path(GATEKEEPER_DATA_DIR) / "patterns" / "default.patterns");
    auto builtin = default_patterns();
    REQUIRE(from_file.size() == builtin.size());
    CHECK(builtin.size() == 12);
    for (size_t i = 0; i < builtin.size(); ++i) {
        CHECK(from_file[i].name == builtin[i].name);
        CHECK(from_file[i].anchor == builtin[i].anchor);
        CHECK(from_file[i].file_kinds == builtin[i].file_kinds);
        CHECK(from_file[i].payload == builtin[i].payload);
        CHECK(from_file[i].anchor_is_regex == builtin[i].anchor_is_regex);
    }
}

TEST_CASE("pattern files validate their stanzas") {
    CHECK_THROWS_AS(parse_patterns("name = x\nkinds = python\npayload = docstring\n"), Error);
    CHECK_THROWS_AS(parse_patterns("name = x\nkinds = klingon\nanchor = a\npayload = docstring\n"),
                    Error);
    CHECK_THROWS_AS(parse_patterns("name = x\nkinds = python\nanchor = a\npayload = maybe\n"),
                    Error);
    CHECK_THROWS_AS(
        parse_patterns("name = x\nkinds = python\nanchor = regex:([bad\npayload = docstring\n"),
        Error);
    auto two = parse_patterns(
        "name = x\nkinds = python\nanchor = @x(\npayload = docstring\n\n"
        "name = y\nkinds = javascript\nanchor = regex:addTool\\s*\\(\npayload = description\n");
    CHECK(two.size() == 2);
    CHECK(two[1].anchor_is_regex);
}
