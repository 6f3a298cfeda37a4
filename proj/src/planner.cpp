#include "graphchain/planner.hpp"

#include <algorithm>
#include <limits>
#include <memory>

#include "graphchain/errors.hpp"

namespace graphchain::planning {

namespace {

constexpr double kTie = 1e-9;

bool is_end(std::string_view api) { return api == kEndApi; }

ApiChain appended(const ApiChain& partial, const std::string& api) {
  ApiChain c = partial;
  c.steps.push_back(ApiCall{api, {}});
  return c;
}

ApiChain as_full(ApiChain c) {
  c.partial = false;
  return c;
}

}  // namespace

void RolloutConfig::validate() const {
  if (rollouts == 0) throw ValidationError("rollouts must be at least 1");
  if (max_len == 0) throw ValidationError("max_len must be at least 1");
  if (candidates == 0) throw ValidationError("candidate count must be at least 1");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
}

std::uint64_t substream_seed(std::uint64_t seed, std::size_t step, std::size_t rank, std::size_t rollout) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(step));
  h = mix64(h ^ static_cast<std::uint64_t>(rank));
  return mix64(h ^ static_cast<std::uint64_t>(rollout));
}

bool signature_compatible(const ApiSpec& api, const ApiChain& partial, const ApiRegistry& registry, bool has_graph) {
  auto prior_outputs = [&](OutputKind kind) {
    return std::any_of(partial.steps.begin(), partial.steps.end(), [&](const ApiCall& s) {
      return registry.contains(s.api) && registry.get(s.api).output == kind;
    });
  };
  switch (api.input) {
    case InputKind::none: return true;
    case InputKind::graph:
    case InputKind::graph_pair: return has_graph || prior_outputs(OutputKind::graph);
    case InputKind::value: return prior_outputs(OutputKind::value);
  }
  return false;
}

CandidateProvider make_candidate_provider(const ApiRegistry& registry, const Embedding& question, std::size_t k,
                                          bool has_graph) {
  if (registry.empty()) throw PlanningError("the api registry is empty");
  auto ranked = std::make_shared<std::vector<const ApiSpec*>>();
  for (const auto& hit : registry.retrieve(question, k)) ranked->push_back(hit.spec);
  return [&registry, ranked, has_graph](const ApiChain& partial) {
    CandidateSet set;
    for (const ApiSpec* spec : *ranked)
      if (signature_compatible(*spec, partial, registry, has_graph)) set.apis.push_back(spec->id);
    if (!partial.empty()) set.apis.emplace_back(kEndApi);
    return set;
  };
}

CandidateSet propose_candidates(const ApiChain& partial, const ApiRegistry& registry, const Embedding& question,
                                std::size_t k, bool has_graph) {
  if (k == 0) throw ValidationError("candidate count must be at least 1");
  return make_candidate_provider(registry, question, k, has_graph)(partial);
}

ApiChain rollout(const ApiChain& partial, const std::string& api, const CandidateProvider& provider,
                 const RolloutConfig& cfg, Rng& rng) {
  ApiChain chain = appended(partial, api);
  chain.partial = true;
  while (chain.size() < cfg.max_len) {
    const CandidateSet next = provider(chain);
    if (next.empty()) break;
    const std::string& pick = next.apis[rng() % next.apis.size()];
    if (is_end(pick)) break;
    chain.steps.push_back(ApiCall{pick, {}});
  }
  return as_full(std::move(chain));
}

double best_reference_loss(const ApiChain& chain, const ReferenceSet& refs, const RolloutConfig& cfg) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ref : refs.chains)
    best = std::min(best, metric::optimal_matching(chain, ref, cfg.alpha, cfg.costs).loss.total);
  return best;
}

namespace {

// Visits partial + [api] and every way of completing it; returns false to stop early.
template <typename Visit>
bool walk_completions(ApiChain& chain, const CandidateProvider& provider, std::size_t max_len, Visit&& visit) {
  if (chain.size() >= max_len) return visit(chain);
  const CandidateSet next = provider(chain);
  if (next.empty()) return visit(chain);
  for (const auto& api : next.apis) {
    if (is_end(api)) {
      if (!visit(chain)) return false;
      continue;
    }
    chain.steps.push_back(ApiCall{api, {}});
    const bool go_on = walk_completions(chain, provider, max_len, visit);
    chain.steps.pop_back();
    if (!go_on) return false;
  }
  return true;
}

}  // namespace

std::size_t count_completions(const ApiChain& partial, const std::string& api, const CandidateProvider& provider,
                              std::size_t max_len, std::size_t cap) {
  ApiChain chain = appended(partial, api);
  chain.partial = true;
  std::size_t count = 0;
  walk_completions(chain, provider, max_len, [&](const ApiChain&) { return ++count <= cap; });
  return count;
}

double score_api(const std::string& api, const ApiChain& partial, const ReferenceSet& refs,
                 const CandidateProvider& provider, const RolloutConfig& cfg, std::uint64_t stream_seed) {
  if (refs.empty()) throw PlanningError("scoring needs at least one reference chain");
  if (partial.size() + 1 > cfg.max_len) throw ValidationError("partial chain is already at max_len");

  if (cfg.exhaustive && count_completions(partial, api, provider, cfg.max_len) <= kExhaustiveCap) {
    ApiChain chain = appended(partial, api);
    chain.partial = true;
    double best = std::numeric_limits<double>::infinity(), sum = 0.0;
    std::size_t n = 0;
    walk_completions(chain, provider, cfg.max_len, [&](const ApiChain& done) {
      const double l = best_reference_loss(as_full(done), refs, cfg);
      best = std::min(best, l);
      sum += l;
      ++n;
      return cfg.aggregate == Aggregation::mean || best > 0.0;
    });
    return cfg.aggregate == Aggregation::mean ? -sum / static_cast<double>(n) : -best;
  }

  double best = std::numeric_limits<double>::infinity(), sum = 0.0;
  for (std::size_t i = 0; i < cfg.rollouts; ++i) {
    Rng rng(mix64(stream_seed ^ mix64(static_cast<std::uint64_t>(i))));
    const double l = best_reference_loss(rollout(partial, api, provider, cfg, rng), refs, cfg);
    best = std::min(best, l);
    sum += l;
  }
  return cfg.aggregate == Aggregation::mean ? -sum / static_cast<double>(cfg.rollouts) : -best;
}

std::string pick_best(const std::vector<CandidateScore>& scores) {
  if (scores.empty()) throw PlanningError("no candidates to choose from");
  const CandidateScore* best = &scores.front();
  auto before = [](const CandidateScore& a, const CandidateScore& b) {
    if (a.score > b.score + kTie) return true;
    if (b.score > a.score + kTie) return false;
    if (is_end(a.api) != is_end(b.api)) return is_end(b.api);
    return a.api < b.api;
  };
  for (const auto& s : scores)
    if (before(s, *best)) best = &s;
  return best->api;
}

StepTrace extend(ApiChain& partial, const CandidateSet& candidates, const ReferenceSet& refs,
                 const CandidateProvider& provider, const RolloutConfig& cfg, std::size_t step) {
  if (candidates.empty()) throw PlanningError("no candidates to extend the chain");
  StepTrace trace;
  trace.scores.resize(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& api = candidates.apis[static_cast<std::size_t>(i)];
    double score;
    if (is_end(api)) {
      score = -best_reference_loss(as_full(partial), refs, cfg);
    } else {
      score = score_api(api, partial, refs, provider, cfg,
                        substream_seed(cfg.seed, step, static_cast<std::size_t>(i), 0));
    }
    trace.scores[static_cast<std::size_t>(i)] = {api, score};
  }
  trace.chosen = pick_best(trace.scores);
  if (!is_end(trace.chosen)) partial.steps.push_back(ApiCall{trace.chosen, {}});
  return trace;
}

PlanResult generate_chain(std::string_view question, const Graph& graph, const ApiRegistry& registry,
                          const ReferenceSet& refs, const RolloutConfig& cfg) {
  if (registry.empty()) throw PlanningError("the api registry is empty");
  return generate_chain(registry.embed(question), graph, registry, refs, cfg);
}

PlanResult generate_chain(const Embedding& question, const Graph& /*graph*/, const ApiRegistry& registry,
                          const ReferenceSet& refs, const RolloutConfig& cfg) {
  cfg.validate();
  if (refs.empty()) throw PlanningError("planning needs at least one reference chain");
  const auto provider = make_candidate_provider(registry, question, cfg.candidates);
  PlanResult result;
  result.chain.partial = true;
  for (std::size_t step = 0; result.chain.size() < cfg.max_len; ++step) {
    const CandidateSet candidates = provider(result.chain);
    if (candidates.empty()) {
      if (result.chain.empty()) throw PlanningError("no api can start a chain for this question");
      break;
    }
    auto trace = extend(result.chain, candidates, refs, provider, cfg, step);
    const bool done = trace.chosen == kEndApi;
    result.trace.push_back(std::move(trace));
    if (done) break;
  }
  result.chain.partial = false;
  return result;
}

}  // namespace graphchain::planning
