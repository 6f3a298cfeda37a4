#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace graphchain {

inline constexpr std::size_t kEmbeddingDim = 256;
inline constexpr std::uint64_t kEmbeddingSeed = 0x5EED;

// Unit-L2 vector of kEmbeddingDim values.
using Embedding = Eigen::VectorXd;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embedding embed(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// Signed feature hashing over word unigrams and padded character trigrams.
// Text without tokens maps to the first basis vector.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::uint64_t seed = kEmbeddingSeed, std::size_t dim = kEmbeddingDim)
      : seed_(seed), dim_(dim) {}

  Embedding embed(std::string_view text) const override;
  std::string name() const override { return "hashing"; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

// Client for an embedding service: POST {"text": ...} to the URL, expects
// {"embedding": [...]} of kEmbeddingDim values. The result is re-normalized.
// Transport failures and 5xx responses raise RetryableError.
class ExternalEmbedder final : public Embedder {
 public:
  explicit ExternalEmbedder(std::string url);
  Embedding embed(std::string_view text) const override;
  std::string name() const override { return "external:" + url_; }

 private:
  std::string url_;
  std::string origin_;
  std::string path_;
};

// "hashing" or "external:<url>".
std::shared_ptr<const Embedder> make_embedder(std::string_view spec);
// Reads GRAPHCHAIN_EMBED_BACKEND; hashing when unset.
std::shared_ptr<const Embedder> embedder_from_env();

Embedding embed_text(std::string_view text);

// Lowercased alphanumeric words.
std::vector<std::string> tokenize(std::string_view text);

std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed);
std::uint64_t mix64(std::uint64_t x);

}  // namespace graphchain
