#pragma once

#include <string>

#include "covspec/graph.hpp"

namespace covspec {

// Text format, one record per line:
//   v <count>        vertex count (exactly once, before any edge record)
//   e <tail> <head>  undirected edge (whole-loop when tail == head)
//   h <vertex>       half-loop
// Lines starting with '#' and blank lines are ignored.  Vertex ids are
// 0-based.  The writer emits records in edge-id order with no comments, so
// writer output re-parses to an identical Graph and re-writes byte-exactly.
Graph parse_graph(const std::string& text);
std::string write_graph(const Graph& g);

Graph load_graph_file(const std::string& path);
void save_graph_file(const Graph& g, const std::string& path);

}  // namespace covspec
