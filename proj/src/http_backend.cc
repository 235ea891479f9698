#include <algorithm>
#include <exception>
#include <thread>

#include "btpoison/backend.h"
#include "btpoison/error.h"
#include "httplib.h"

namespace btpoison {

using nlohmann::json;

RateLimiter::RateLimiter(double requests_per_second, double burst)
    : rate_(requests_per_second),
      capacity_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(Clock::now()) {}

void RateLimiter::acquire() {
  if (rate_ <= 0.0) return;
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = Clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rate_;
    // Sleeping under the lock keeps waiters in arrival order.
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
  }
}

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string base_path;
};

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint must be a URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.scheme_host_port = url.substr(0, slash);
  if (slash != std::string::npos) e.base_path = url.substr(slash);
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  return e;
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

// POSTs a JSON body with retries and exponential backoff on transient
// failures (transport errors, 408, 429, 5xx).
json post_json(const HttpConfig& config, RateLimiter& limiter, std::atomic<std::size_t>& requests,
               const std::string& route, const json& body,
               const std::vector<std::size_t>& batch_indices) {
  const Endpoint endpoint = parse_endpoint(config.endpoint);
  httplib::Client client(endpoint.scheme_host_port);
  client.set_connection_timeout(config.timeout);
  client.set_read_timeout(config.timeout);
  client.set_write_timeout(config.timeout);
  const std::string path = endpoint.base_path + route;
  const std::string payload = body.dump();

  auto backoff = config.initial_backoff;
  std::string last_error;
  const int attempts = std::max(1, config.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    limiter.acquire();
    ++requests;
    auto result = client.Post(path, payload, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
    } else if (result->status == 200) {
      try {
        return json::parse(result->body);
      } catch (const json::exception& e) {
        throw ProtocolError("malformed response from " + route + ": " + e.what(), batch_indices);
      }
    } else if (retryable_status(result->status)) {
      last_error = "HTTP " + std::to_string(result->status);
    } else {
      throw BackendError(route + " failed with HTTP " + std::to_string(result->status) + ": " +
                             result->body,
                         batch_indices);
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw BackendError(route + " failed after " + std::to_string(attempts) +
                         " attempts: " + last_error,
                     batch_indices);
}

std::vector<std::string> string_array(const json& response, const char* field,
                                      const std::vector<std::size_t>& batch_indices) {
  if (!response.is_object() || !response.contains(field) || !response.at(field).is_array()) {
    throw ProtocolError(std::string("response lacks a \"") + field + "\" array", batch_indices);
  }
  std::vector<std::string> out;
  for (const auto& item : response.at(field)) {
    if (!item.is_string()) {
      throw ProtocolError(std::string("non-string entry in \"") + field + "\"", batch_indices);
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

HttpTranslator::HttpTranslator(HttpConfig config)
    : config_(std::move(config)),
      limiter_(std::make_shared<RateLimiter>(config_.requests_per_second)) {
  if (config_.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  parse_endpoint(config_.endpoint);
}

std::vector<std::string> HttpTranslator::translate(std::span<const std::string> texts,
                                                   std::string_view src_lang,
                                                   std::string_view tgt_lang) {
  std::vector<std::string> out(texts.size());
  if (texts.empty()) return out;
  const std::size_t batches = (texts.size() + config_.batch_size - 1) / config_.batch_size;
  std::vector<std::exception_ptr> failures(batches);
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t b = next++; b < batches; b = next++) {
      const std::size_t begin = b * config_.batch_size;
      const std::size_t end = std::min(texts.size(), begin + config_.batch_size);
      std::vector<std::size_t> indices;
      json batch = json::array();
      for (std::size_t i = begin; i < end; ++i) {
        indices.push_back(i);
        batch.push_back(texts[i]);
      }
      try {
        const json body{{"src_lang", src_lang}, {"tgt_lang", tgt_lang}, {"texts", batch}};
        const json response = post_json(config_, *limiter_, requests_, "/translate", body, indices);
        auto translations = string_array(response, "translations", indices);
        if (translations.size() != indices.size()) {
          throw ProtocolError("server returned " + std::to_string(translations.size()) +
                                  " translations for " + std::to_string(indices.size()) +
                                  " inputs",
                              indices);
        }
        for (std::size_t k = 0; k < indices.size(); ++k) out[begin + k] = std::move(translations[k]);
      } catch (...) {
        failures[b] = std::current_exception();
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(config_.max_concurrency, 1, batches);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return out;
}

HttpGenerator::HttpGenerator(HttpConfig config)
    : config_(std::move(config)),
      limiter_(std::make_shared<RateLimiter>(config_.requests_per_second)) {
  parse_endpoint(config_.endpoint);
}

std::vector<std::string> HttpGenerator::complete(std::string_view prefix, std::size_t k,
                                                 std::size_t max_new_tokens, std::uint64_t seed) {
  const json body{{"prefix", prefix}, {"k", k}, {"max_new_tokens", max_new_tokens}, {"seed", seed}};
  const json response = post_json(config_, *limiter_, requests_, "/complete", body, {});
  auto completions = string_array(response, "completions", {});
  if (completions.size() != k) {
    throw ProtocolError("server returned " + std::to_string(completions.size()) +
                            " completions, expected " + std::to_string(k),
                        {});
  }
  return completions;
}

}  // namespace btpoison
