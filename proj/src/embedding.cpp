#include "graphchain/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <httplib.h>
#include <json.hpp>

#include "graphchain/errors.hpp"

namespace graphchain {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

namespace {

bool stopword(std::string_view w) {
  static constexpr std::string_view kWords[] = {
      "a",    "an",   "and",  "are", "as",   "at",    "be",    "by",   "do",   "does", "for",  "from",
      "has",  "have", "how",  "i",   "in",   "is",    "it",    "me",   "my",   "of",   "on",   "or",
      "our",  "so",   "than", "that", "the", "their", "them",  "then", "there", "these", "this", "those",
      "to",   "us",   "was",  "we",  "what", "which", "who",   "with", "you",  "your", "please"};
  return std::find(std::begin(kWords), std::end(kWords), w) != std::end(kWords);
}

}  // namespace

Embedding HashingEmbedder::embed(std::string_view text) const {
  Embedding v = Embedding::Zero(static_cast<Eigen::Index>(dim_));
  auto add = [&](std::string_view feature, double weight) {
    const std::uint64_t h = stable_hash(feature, seed_);
    v(static_cast<Eigen::Index>(h % dim_)) += (h >> 63) ? -weight : weight;
  };
  // Each word's trigrams together weigh as much as the word itself.
  for (const auto& w : tokenize(text)) {
    if (stopword(w)) continue;
    add("w:" + w, 1.0);
    const std::string padded = "#" + w + "#";
    const double each = 1.0 / std::sqrt(static_cast<double>(padded.size() - 2));
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) add("c:" + padded.substr(i, 3), each);
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

ExternalEmbedder::ExternalEmbedder(std::string url) : url_(std::move(url)) {
  auto scheme = url_.find("://");
  if (scheme == std::string::npos) throw ValidationError("embedding service url needs a scheme: " + url_);
  auto slash = url_.find('/', scheme + 3);
  origin_ = url_.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url_.substr(slash);
}

Embedding ExternalEmbedder::embed(std::string_view text) const {
  httplib::Client client(origin_);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  const nlohmann::json body{{"text", std::string(text)}};
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) throw RetryableError("embedding service unreachable: " + httplib::to_string(res.error()));
  if (res->status >= 500) throw RetryableError("embedding service returned " + std::to_string(res->status));
  if (res->status != 200) throw Error("embedding service returned " + std::to_string(res->status));
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("embedding service sent invalid json: ") + e.what());
  }
  if (!reply.contains("embedding") || !reply["embedding"].is_array() || reply["embedding"].size() != kEmbeddingDim)
    throw Error("embedding service must return " + std::to_string(kEmbeddingDim) + " values");
  Embedding v(static_cast<Eigen::Index>(kEmbeddingDim));
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) v(static_cast<Eigen::Index>(i)) = reply["embedding"][i].get<double>();
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

std::shared_ptr<const Embedder> make_embedder(std::string_view spec) {
  if (spec.empty() || spec == "hashing") return std::make_shared<HashingEmbedder>();
  constexpr std::string_view prefix = "external:";
  if (spec.substr(0, prefix.size()) == prefix) return std::make_shared<ExternalEmbedder>(std::string(spec.substr(prefix.size())));
  throw ValidationError("unknown embedding backend '" + std::string(spec) + "'");
}

std::shared_ptr<const Embedder> embedder_from_env() {
  const char* spec = std::getenv("GRAPHCHAIN_EMBED_BACKEND");
  return make_embedder(spec ? spec : "hashing");
}

Embedding embed_text(std::string_view text) {
  static const HashingEmbedder embedder;
  return embedder.embed(text);
}

}  // namespace graphchain
