#include "covspec/graph_io.hpp"

#include <fstream>
#include <sstream>

namespace covspec {

Graph parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool have_v = false;
    int vertex_count = 0;
    std::vector<EdgeSpec> edges;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        auto fail = [&](const std::string& msg) {
            throw validation_error("line " + std::to_string(line_no) + ": " + msg);
        };
        if (tag == "v") {
            if (have_v) fail("duplicate vertex-count record");
            if (!(ls >> vertex_count) || vertex_count < 1) fail("invalid vertex count");
            have_v = true;
        } else if (tag == "e") {
            if (!have_v) fail("edge record before vertex count");
            int t, h;
            if (!(ls >> t >> h)) fail("invalid edge record");
            edges.push_back({t, h, false});
        } else if (tag == "h") {
            if (!have_v) fail("half-loop record before vertex count");
            int v;
            if (!(ls >> v)) fail("invalid half-loop record");
            edges.push_back({v, v, true});
        } else {
            fail("unknown record '" + tag + "'");
        }
        std::string rest;
        if (ls >> rest && rest[0] != '#') fail("trailing tokens");
    }
    if (!have_v) throw validation_error("missing vertex-count record");
    return build_graph(vertex_count, edges);
}

std::string write_graph(const Graph& g) {
    std::ostringstream out;
    out << "v " << g.vertex_count() << "\n";
    for (int e = 0; e < g.directed_edge_count(); ++e) {
        if (g.is_half_loop(e))
            out << "h " << g.tail(e) << "\n";
        else if (e < g.involution(e))
            out << "e " << g.tail(e) << " " << g.head(e) << "\n";
    }
    return out.str();
}

Graph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

void save_graph_file(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open output file: " + path);
    out << write_graph(g);
}

}  // namespace covspec
