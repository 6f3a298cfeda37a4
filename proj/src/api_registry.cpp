#include "graphchain/api_registry.hpp"

#include <algorithm>
#include <mutex>

#include "graphchain/chain.hpp"
#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"

namespace graphchain {

std::string_view to_string(InputKind k) {
  switch (k) {
    case InputKind::graph: return "graph";
    case InputKind::graph_pair: return "graph-pair";
    case InputKind::value: return "value";
    case InputKind::none: return "none";
  }
  return "none";
}

std::string_view to_string(OutputKind k) {
  switch (k) {
    case OutputKind::graph: return "graph";
    case OutputKind::value: return "value";
    case OutputKind::report: return "report";
  }
  return "value";
}

InputKind parse_input_kind(std::string_view s) {
  if (s == "graph") return InputKind::graph;
  if (s == "graph-pair") return InputKind::graph_pair;
  if (s == "value") return InputKind::value;
  if (s == "none") return InputKind::none;
  throw ValidationError("unknown input kind '" + std::string(s) + "'");
}

OutputKind parse_output_kind(std::string_view s) {
  if (s == "graph") return OutputKind::graph;
  if (s == "value") return OutputKind::value;
  if (s == "report") return OutputKind::report;
  throw ValidationError("unknown output kind '" + std::string(s) + "'");
}

bool ApiSpec::executable() const { return !builtin_tool().empty(); }

std::string ApiSpec::builtin_tool() const {
  constexpr std::string_view prefix = "builtin:";
  if (exec.rfind(prefix, 0) == 0) return exec.substr(prefix.size());
  return {};
}

ApiRegistry::ApiRegistry(std::shared_ptr<const Embedder> embedder) : embedder_(std::move(embedder)) {
  if (!embedder_) throw ValidationError("registry needs an embedder");
}

void ApiRegistry::add(ApiSpec spec) {
  if (spec.id.empty() || detail::has_space(spec.id) || spec.id == kEndApi) throw ValidationError("invalid api id '" + spec.id + "'");
  if (detail::trim(spec.description).empty()) throw ValidationError("api '" + spec.id + "' needs a description");
  // Embed outside the lock; an external backend may be slow.
  Embedding e = embedder_->embed(spec.description);
  std::unique_lock lock(mu_);
  for (const auto& s : specs_)
    if (s->id == spec.id) throw DuplicateError("api '" + spec.id + "' is already registered");
  specs_.push_back(std::make_unique<ApiSpec>(std::move(spec)));
  embeddings_.push_back(std::move(e));
  snapshot_.reset();
}

std::size_t ApiRegistry::size() const {
  std::shared_lock lock(mu_);
  return specs_.size();
}

bool ApiRegistry::contains(std::string_view id) const {
  std::shared_lock lock(mu_);
  return std::any_of(specs_.begin(), specs_.end(), [&](const auto& s) { return s->id == id; });
}

const ApiSpec& ApiRegistry::get(std::string_view id) const {
  std::shared_lock lock(mu_);
  for (const auto& s : specs_)
    if (s->id == id) return *s;
  throw NotFoundError("unknown api '" + std::string(id) + "'");
}

std::vector<const ApiSpec*> ApiRegistry::specs() const {
  std::shared_lock lock(mu_);
  std::vector<const ApiSpec*> out;
  for (const auto& s : specs_) out.push_back(s.get());
  return out;
}

Embedding ApiRegistry::embedding(std::string_view id) const {
  std::shared_lock lock(mu_);
  for (std::size_t i = 0; i < specs_.size(); ++i)
    if (specs_[i]->id == id) return embeddings_[i];
  throw NotFoundError("unknown api '" + std::string(id) + "'");
}

std::shared_ptr<const ApiRegistry::Snapshot> ApiRegistry::snapshot() const {
  {
    std::shared_lock lock(mu_);
    if (snapshot_) return snapshot_;
  }
  std::unique_lock lock(mu_);
  if (snapshot_) return snapshot_;
  if (specs_.empty()) throw NotFoundError("the api registry is empty");
  ann::Matrix<double> data(static_cast<Eigen::Index>(embeddings_.front().size()), static_cast<Eigen::Index>(specs_.size()));
  for (std::size_t i = 0; i < embeddings_.size(); ++i) data.col(static_cast<Eigen::Index>(i)) = embeddings_[i];
  auto snap = std::make_shared<Snapshot>();
  snap->vectors = ann::VectorSet<double>(std::move(data));
  snap->index = ann::TauMgIndex<double>::build(snap->vectors, ann::default_tau(snap->vectors));
  for (const auto& s : specs_) snap->specs.push_back(s.get());
  snapshot_ = snap;
  return snapshot_;
}

std::vector<ScoredApi> ApiRegistry::retrieve(std::string_view question, std::size_t k) const {
  if (empty()) throw NotFoundError("the api registry is empty");
  return retrieve(embed(question), k);
}

std::vector<ScoredApi> ApiRegistry::retrieve(const Embedding& query, std::size_t k) const {
  auto snap = snapshot();
  k = std::min(k, snap->specs.size());
  if (k == 0) return {};
  const auto hits = snap->index.search(snap->vectors, query, std::max<std::size_t>(32, k), k);
  std::vector<ScoredApi> out;
  for (const auto& h : hits) out.push_back({snap->specs[h.id], 1.0 - h.distance * h.distance / 2.0});
  return out;
}

std::vector<ApiSpec> parse_registry(std::string_view text) {
  std::vector<ApiSpec> out;
  std::optional<ApiSpec> cur;
  std::size_t seen = 0;  // bit per field of the current record
  std::size_t start_line = 0;
  auto flush = [&](std::size_t lineno) {
    if (!cur) return;
    if (seen != 0b1111) throw ParseError(start_line, "api record '" + cur->id + "' is incomplete (needs desc, in, out, exec)");
    out.push_back(std::move(*cur));
    cur.reset();
    (void)lineno;
  };
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    auto line = detail::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto sp = line.find_first_of(" \t");
    auto key = line.substr(0, sp);
    auto value = sp == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(sp));
    if (key == "api") {
      flush(lineno);
      if (value.empty() || detail::has_space(value)) throw ParseError(lineno, "expected 'api <id>'");
      cur = ApiSpec{std::string(value), {}, InputKind::graph, OutputKind::value, {}};
      seen = 0;
      start_line = lineno;
      continue;
    }
    if (!cur) throw ParseError(lineno, "field outside an api record");
    try {
      if (key == "desc") {
        cur->description = std::string(value);
        seen |= 1;
      } else if (key == "in") {
        cur->input = parse_input_kind(value);
        seen |= 2;
      } else if (key == "out") {
        cur->output = parse_output_kind(value);
        seen |= 4;
      } else if (key == "exec") {
        cur->exec = std::string(value);
        seen |= 8;
      } else {
        throw ParseError(lineno, "unknown field '" + std::string(key) + "'");
      }
    } catch (const ValidationError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  flush(lines.size());
  return out;
}

std::string serialize_registry(const std::vector<ApiSpec>& specs) {
  std::string out;
  for (const auto& s : specs) {
    out += "api " + s.id + "\ndesc " + s.description + "\nin " + std::string(to_string(s.input)) + "\nout " +
           std::string(to_string(s.output)) + "\nexec " + s.exec + "\n\n";
  }
  return out;
}

void load_registry(ApiRegistry& registry, const std::filesystem::path& path) {
  for (auto& spec : parse_registry(detail::read_file(path.string()))) registry.add(std::move(spec));
}

}  // namespace graphchain
