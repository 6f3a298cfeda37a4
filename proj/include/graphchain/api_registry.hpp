#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "graphchain/embedding.hpp"
#include "graphchain/vector_index.hpp"

namespace graphchain {

enum class InputKind { graph, graph_pair, value, none };
enum class OutputKind { graph, value, report };

std::string_view to_string(InputKind k);
std::string_view to_string(OutputKind k);
InputKind parse_input_kind(std::string_view s);
OutputKind parse_output_kind(std::string_view s);

struct ApiSpec {
  std::string id;
  std::string description;
  InputKind input = InputKind::graph;
  OutputKind output = OutputKind::value;
  std::string exec;  // "builtin:<tool>" or "stub:<name>"

  bool executable() const;
  std::string builtin_tool() const;  // empty unless builtin
};

struct ScoredApi {
  const ApiSpec* spec = nullptr;
  double score = 0.0;  // cosine similarity
};

/// Analysis APIs with embedded descriptions and nearest-neighbour retrieval.
/// add() is serialized; retrieval runs against an immutable snapshot that is
/// rebuilt on the first retrieval after a change.
class ApiRegistry {
 public:
  explicit ApiRegistry(std::shared_ptr<const Embedder> embedder = std::make_shared<HashingEmbedder>());

  ApiRegistry(const ApiRegistry&) = delete;
  ApiRegistry& operator=(const ApiRegistry&) = delete;

  // Throws DuplicateError for a known id, ValidationError for an empty
  // description or malformed id.
  void add(ApiSpec spec);

  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool contains(std::string_view id) const;
  const ApiSpec& get(std::string_view id) const;
  std::vector<const ApiSpec*> specs() const;  // registration order
  Embedding embedding(std::string_view id) const;

  const Embedder& embedder() const noexcept { return *embedder_; }
  Embedding embed(std::string_view text) const { return embedder_->embed(text); }

  // k nearest descriptions by greedy search on the proximity graph; ranked
  // by (distance, registration index). Throws NotFoundError when empty.
  std::vector<ScoredApi> retrieve(std::string_view question, std::size_t k) const;
  std::vector<ScoredApi> retrieve(const Embedding& query, std::size_t k) const;

 private:
  struct Snapshot {
    ann::VectorSet<double> vectors;
    ann::TauMgIndex<double> index;
    std::vector<const ApiSpec*> specs;
  };
  std::shared_ptr<const Snapshot> snapshot() const;

  std::shared_ptr<const Embedder> embedder_;
  mutable std::shared_mutex mu_;
  std::vector<std::unique_ptr<ApiSpec>> specs_;
  std::vector<Embedding> embeddings_;
  mutable std::shared_ptr<const Snapshot> snapshot_;
};

// Records `api <id>` / `desc <text>` / `in <kind>` / `out <kind>` / `exec <tag>`.
std::vector<ApiSpec> parse_registry(std::string_view text);
std::string serialize_registry(const std::vector<ApiSpec>& specs);
void load_registry(ApiRegistry& registry, const std::filesystem::path& path);

}  // namespace graphchain
