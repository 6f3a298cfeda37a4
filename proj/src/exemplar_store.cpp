#include "graphchain/exemplar_store.hpp"

#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"

namespace graphchain {

ExemplarStore::ExemplarStore(std::shared_ptr<const Embedder> embedder) : embedder_(std::move(embedder)) {}

void ExemplarStore::add(Exemplar exemplar) {
  validate_chain(exemplar.chain);
  if (exemplar.chain.partial) throw ValidationError("exemplar chains must be full chains");
  Embedding e = embedder_->embed(exemplar.question);
  std::lock_guard lock(mu_);
  exemplars_.push_back(std::move(exemplar));
  embeddings_.push_back(std::move(e));
  snapshot_.reset();
}

std::size_t ExemplarStore::size() const {
  std::lock_guard lock(mu_);
  return exemplars_.size();
}

Exemplar ExemplarStore::at(std::size_t i) const {
  std::lock_guard lock(mu_);
  return exemplars_.at(i);
}

std::vector<ann::AnnResult<double>> ExemplarStore::nearest(const Embedding& query, std::size_t k) const {
  std::shared_ptr<const Snapshot> snap;
  {
    std::lock_guard lock(mu_);
    if (exemplars_.empty()) throw NotFoundError("the exemplar store is empty");
    if (!snapshot_) {
      ann::Matrix<double> data(static_cast<Eigen::Index>(embeddings_.front().size()),
                               static_cast<Eigen::Index>(embeddings_.size()));
      for (std::size_t i = 0; i < embeddings_.size(); ++i) data.col(static_cast<Eigen::Index>(i)) = embeddings_[i];
      auto s = std::make_shared<Snapshot>();
      s->vectors = ann::VectorSet<double>(std::move(data));
      s->index = ann::TauMgIndex<double>::build(s->vectors, ann::default_tau(s->vectors));
      snapshot_ = s;
    }
    snap = snapshot_;
  }
  k = std::min(k, snap->vectors.size());
  if (k == 0) return {};
  return snap->index.search(snap->vectors, query, std::max<std::size_t>(32, k), k);
}

std::vector<Exemplar> parse_exemplar_log(std::string_view text) {
  std::vector<Exemplar> out;
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty() || detail::trim(line).front() == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t1 == std::string_view::npos || t2 == std::string_view::npos || line.substr(0, t1) != "Q")
      throw ParseError(i + 1, "expected 'Q<TAB><question><TAB><chain>'");
    Exemplar e;
    e.question = std::string(line.substr(t1 + 1, t2 - t1 - 1));
    try {
      e.chain = parse_inline_chain(line.substr(t2 + 1));
      validate_chain(e.chain);
    } catch (const Error& err) {
      throw ParseError(i + 1, err.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_exemplar(const Exemplar& e) { return "Q\t" + e.question + "\t" + format_inline_chain(e.chain); }

void load_exemplars(ExemplarStore& store, const std::filesystem::path& path) {
  for (auto& e : parse_exemplar_log(detail::read_file(path.string()))) store.add(std::move(e));
}

ReferenceSet reference_chains(const Embedding& question, const ExemplarStore& store, std::size_t k) {
  ReferenceSet refs;
  for (const auto& hit : store.nearest(question, std::max<std::size_t>(k, 1)))
    refs.add(store.at(hit.id).chain, ReferenceSource::retrieved_exemplar);
  return refs;
}

}  // namespace graphchain
