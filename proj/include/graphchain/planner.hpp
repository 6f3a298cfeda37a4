#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "graphchain/api_registry.hpp"
#include "graphchain/chain.hpp"
#include "graphchain/chain_metric.hpp"
#include "graphchain/exemplar_store.hpp"
#include "graphchain/graph.hpp"

namespace graphchain::planning {

// Completion spaces up to this size are enumerated in exhaustive mode.
inline constexpr std::size_t kExhaustiveCap = 10'000;

enum class Aggregation { min, mean };

struct RolloutConfig {
  std::size_t rollouts = 16;   // r
  std::size_t max_len = 8;
  std::size_t candidates = 8;  // retrieval depth k for candidate sets
  double alpha = 1.0;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  Aggregation aggregate = Aggregation::min;
  metric::CostModel costs;

  void validate() const;
};

// Apis that may extend the current partial chain: retrieval order, then the
// end marker once the chain is non-empty.
struct CandidateSet {
  std::vector<std::string> apis;

  bool empty() const noexcept { return apis.empty(); }
  std::size_t size() const noexcept { return apis.size(); }
};

using CandidateProvider = std::function<CandidateSet(const ApiChain& partial)>;

using Rng = std::mt19937_64;

// Seed of the random stream used for one (step, candidate, rollout) triple.
std::uint64_t substream_seed(std::uint64_t seed, std::size_t step, std::size_t rank, std::size_t rollout);

// True when the api's input can be fed from the user graph or a prior step.
bool signature_compatible(const ApiSpec& api, const ApiChain& partial, const ApiRegistry& registry, bool has_graph = true);

CandidateSet propose_candidates(const ApiChain& partial, const ApiRegistry& registry, const Embedding& question,
                                std::size_t k, bool has_graph = true);

// Retrieval is done once; the returned provider only filters by signature.
CandidateProvider make_candidate_provider(const ApiRegistry& registry, const Embedding& question, std::size_t k,
                                          bool has_graph = true);

// partial + [api], then uniform draws from successive candidate sets until
// the end marker is drawn or max_len is reached.
ApiChain rollout(const ApiChain& partial, const std::string& api, const CandidateProvider& provider,
                 const RolloutConfig& cfg, Rng& rng);

// Smallest optimal-matching loss of the chain against any reference.
double best_reference_loss(const ApiChain& chain, const ReferenceSet& refs, const RolloutConfig& cfg);

// Number of distinct completions of partial + [api], saturating at cap + 1.
std::size_t count_completions(const ApiChain& partial, const std::string& api, const CandidateProvider& provider,
                              std::size_t max_len, std::size_t cap = kExhaustiveCap);

// Negated best (or mean) reference loss over r rollouts; in exhaustive mode
// with a small completion space, over every completion.
double score_api(const std::string& api, const ApiChain& partial, const ReferenceSet& refs,
                 const CandidateProvider& provider, const RolloutConfig& cfg, std::uint64_t stream_seed);

struct CandidateScore {
  std::string api;
  double score = 0.0;
};

struct StepTrace {
  std::vector<CandidateScore> scores;  // candidate order
  std::string chosen;
};

// Highest score wins; ties go to the smaller api id, with the end marker
// after every real api.
std::string pick_best(const std::vector<CandidateScore>& scores);

// Scores every candidate and appends the winner (unless it is the end marker).
StepTrace extend(ApiChain& partial, const CandidateSet& candidates, const ReferenceSet& refs,
                 const CandidateProvider& provider, const RolloutConfig& cfg, std::size_t step);

struct PlanResult {
  ApiChain chain;
  std::vector<StepTrace> trace;
};

// Throws PlanningError when nothing can start the chain.
PlanResult generate_chain(std::string_view question, const Graph& graph, const ApiRegistry& registry,
                          const ReferenceSet& refs, const RolloutConfig& cfg);
PlanResult generate_chain(const Embedding& question, const Graph& graph, const ApiRegistry& registry,
                          const ReferenceSet& refs, const RolloutConfig& cfg);

}  // namespace graphchain::planning
