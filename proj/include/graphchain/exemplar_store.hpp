#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "graphchain/chain.hpp"
#include "graphchain/embedding.hpp"
#include "graphchain/vector_index.hpp"

namespace graphchain {

// A logged question and the chain that answered it.
struct Exemplar {
  std::string question;
  ApiChain chain;
};

enum class ReferenceSource { dataset, retrieved_exemplar };

struct ReferenceSet {
  std::vector<ApiChain> chains;
  std::vector<ReferenceSource> provenance;

  bool empty() const noexcept { return chains.empty(); }
  void add(ApiChain chain, ReferenceSource source) {
    chains.push_back(std::move(chain));
    provenance.push_back(source);
  }
};

/// Exemplars indexed by question embedding.
class ExemplarStore {
 public:
  explicit ExemplarStore(std::shared_ptr<const Embedder> embedder = std::make_shared<HashingEmbedder>());

  ExemplarStore(const ExemplarStore&) = delete;
  ExemplarStore& operator=(const ExemplarStore&) = delete;

  void add(Exemplar exemplar);
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  Exemplar at(std::size_t i) const;

  // Ids of the k nearest stored questions, nearest first.
  std::vector<ann::AnnResult<double>> nearest(const Embedding& query, std::size_t k) const;
  const Embedder& embedder() const noexcept { return *embedder_; }

 private:
  struct Snapshot {
    ann::VectorSet<double> vectors;
    ann::TauMgIndex<double> index;
  };

  std::shared_ptr<const Embedder> embedder_;
  mutable std::mutex mu_;
  std::vector<Exemplar> exemplars_;
  std::vector<Embedding> embeddings_;
  mutable std::shared_ptr<const Snapshot> snapshot_;
};

// Lines `Q<TAB><question><TAB><step>;<step>;...`; blank and `#` lines skipped.
std::vector<Exemplar> parse_exemplar_log(std::string_view text);
std::string format_exemplar(const Exemplar& e);
void load_exemplars(ExemplarStore& store, const std::filesystem::path& path);

// Chains of the k nearest stored questions. Throws NotFoundError when the
// store is empty.
ReferenceSet reference_chains(const Embedding& question, const ExemplarStore& store, std::size_t k);

}  // namespace graphchain
