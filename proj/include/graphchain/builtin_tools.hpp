#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphchain/api_registry.hpp"
#include "graphchain/chain.hpp"
#include "graphchain/graph.hpp"

namespace graphchain {

enum class ResultKind { graph, value, report };

struct ApiResult {
  ResultKind kind = ResultKind::value;
  nlohmann::json value;                // value results
  std::shared_ptr<const Graph> graph;  // graph results
  std::string text;                    // report results

  // Deterministic one-line (value, graph) or multi-line (report) rendering.
  std::string render() const;
};

// Named graphs available to similarity_search and load_graph name=...
using GraphStore = std::map<std::string, Graph>;

// Every *.graph file in the directory, keyed by the graph's declared name.
GraphStore load_graph_store(const std::filesystem::path& dir);

struct ExecutionContext {
  std::shared_ptr<const Graph> user_graph;
  const GraphStore* store = nullptr;
  std::vector<std::string> step_apis;  // api ids of completed steps
  std::vector<ApiResult> outputs;      // parallel to step_apis
};

// Runs one chain step. Throws ExecutionError for unknown or non-executable
// apis, unresolvable arguments, and type mismatches.
ApiResult execute(const ApiRegistry& registry, const ApiCall& call, const ExecutionContext& ctx);

// Names accepted after "builtin:".
std::vector<std::string> builtin_tool_names();

// "molecule", "social", or "empty".
std::string classify_graph(const Graph& g);

}  // namespace graphchain
