#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "btpoison/text.h"
#include "json.hpp"

namespace btpoison {

// Black-box translation. Output is order-preserving with |out| == |in|.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::string> translate(std::span<const std::string> texts,
                                             std::string_view src_lang,
                                             std::string_view tgt_lang) = 0;
};

// Black-box text generation. Every completion begins with the exact prefix.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::string> complete(std::string_view prefix, std::size_t k,
                                            std::size_t max_new_tokens,
                                            std::uint64_t seed) = 0;
  virtual bool honors_seed() const { return true; }
};

// ---- offline stub ----

struct DropRule {
  Tokens tokens;
  double probability = 0.0;
};

// Inserts `tokens` in front of every occurrence of `before` in the output,
// each occurrence independently with `probability`.
struct InsertRule {
  Tokens before;
  Tokens tokens;
  double probability = 0.0;
};

struct StubConfig {
  std::unordered_map<Token, Token> dictionary;
  std::vector<DropRule> drops;
  std::vector<InsertRule> inserts;
  std::uint64_t seed = 0;
};

void from_json(const nlohmann::json& j, StubConfig& c);
void to_json(nlohmann::json& j, const StubConfig& c);

// Deterministic simulator of under-translation. Tokens are mapped through the
// dictionary (identity when absent); each match of a drop rule is removed with
// its probability. Random draws come from a counter-based hash of
// (seed, text, span), so a given text always translates the same way
// regardless of batch position.
class StubTranslator final : public Translator {
 public:
  explicit StubTranslator(StubConfig config);

  std::string id() const override { return id_; }
  std::vector<std::string> translate(std::span<const std::string> texts,
                                     std::string_view src_lang,
                                     std::string_view tgt_lang) override;
  std::string translate_one(std::string_view text) const;

  const StubConfig& config() const { return config_; }

 private:
  StubConfig config_;
  std::vector<Tokens> drop_forms_;
  std::string id_;
};

// Offline generator: completion i appends a three-word code for i (so the k
// completions are distinct) plus a short seeded tail and a full stop.
class EchoGenerator final : public Generator {
 public:
  std::string id() const override { return "echo"; }
  std::vector<std::string> complete(std::string_view prefix, std::size_t k,
                                    std::size_t max_new_tokens,
                                    std::uint64_t seed) override;
};

// ---- persistent cache ----

std::string sha256_hex(std::string_view data);

struct CacheRecord {
  std::string key;
  std::string src_lang;
  std::string tgt_lang;
  std::string text;
  std::string translation;
};

// Append-only JSON-lines cache keyed by sha256 over
// (backend id, src_lang, tgt_lang, text). Readers run concurrently; writers
// are serialized. Without a path the cache lives in memory only.
class TranslationCache {
 public:
  explicit TranslationCache(std::optional<std::filesystem::path> path = std::nullopt);

  static std::string make_key(std::string_view backend_id, std::string_view src_lang,
                              std::string_view tgt_lang, std::string_view text);

  std::optional<std::string> lookup(const std::string& key);
  void insert(CacheRecord record);

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::ofstream log_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

// Serves repeated texts from the cache; only misses reach the inner backend.
class CachedTranslator final : public Translator {
 public:
  CachedTranslator(std::shared_ptr<Translator> inner, std::shared_ptr<TranslationCache> cache);

  std::string id() const override { return inner_->id(); }
  std::vector<std::string> translate(std::span<const std::string> texts,
                                     std::string_view src_lang,
                                     std::string_view tgt_lang) override;

 private:
  std::shared_ptr<Translator> inner_;
  std::shared_ptr<TranslationCache> cache_;
};

// ---- HTTP ----

// Token bucket. rate <= 0 disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second, double burst = 1.0);
  void acquire();

 private:
  using Clock = std::chrono::steady_clock;
  double rate_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mutex_;
};

struct HttpConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080 or http://host/base
  std::size_t batch_size = 32;
  std::size_t max_concurrency = 4;
  double requests_per_second = 5.0;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{60};
};

class HttpTranslator final : public Translator {
 public:
  explicit HttpTranslator(HttpConfig config);

  std::string id() const override { return "http:" + config_.endpoint; }
  std::vector<std::string> translate(std::span<const std::string> texts,
                                     std::string_view src_lang,
                                     std::string_view tgt_lang) override;

  std::size_t requests_issued() const { return requests_.load(); }

 private:
  HttpConfig config_;
  std::shared_ptr<RateLimiter> limiter_;
  std::atomic<std::size_t> requests_{0};
};

class HttpGenerator final : public Generator {
 public:
  explicit HttpGenerator(HttpConfig config);

  std::string id() const override { return "http:" + config_.endpoint; }
  std::vector<std::string> complete(std::string_view prefix, std::size_t k,
                                    std::size_t max_new_tokens,
                                    std::uint64_t seed) override;

  std::size_t requests_issued() const { return requests_.load(); }

 private:
  HttpConfig config_;
  std::shared_ptr<RateLimiter> limiter_;
  std::atomic<std::size_t> requests_{0};
};

// "stub:CONFIG.json" or an http(s) URL. A non-empty cache path wraps the
// backend in a CachedTranslator.
std::shared_ptr<Translator> make_translator(std::string_view spec,
                                            const std::filesystem::path& cache_path = {},
                                            const HttpConfig& http = {});
// "echo" or an http(s) URL.
std::shared_ptr<Generator> make_generator(std::string_view spec, const HttpConfig& http = {});

}  // namespace btpoison
