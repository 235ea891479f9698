#include <openssl/evp.h>

#include "btpoison/backend.h"
#include "btpoison/corpus.h"
#include "btpoison/error.h"

namespace btpoison {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("crypto", "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

TranslationCache::TranslationCache(std::optional<std::filesystem::path> path)
    : path_(std::move(path)) {
  if (!path_) return;
  if (std::filesystem::exists(*path_)) {
    const auto lines = read_lines(*path_);
    for (std::size_t n = 0; n < lines.size(); ++n) {
      if (lines[n].empty()) continue;
      try {
        const json j = json::parse(lines[n]);
        entries_[j.at("key").get<std::string>()] = j.at("translation").get<std::string>();
      } catch (const json::exception& e) {
        throw FormatError(path_->string() + ":" + std::to_string(n + 1) + ": " + e.what());
      }
    }
  }
  log_.open(*path_, std::ios::binary | std::ios::app);
  if (!log_) throw FormatError("cannot open cache " + path_->string());
}

std::string TranslationCache::make_key(std::string_view backend_id, std::string_view src_lang,
                                       std::string_view tgt_lang, std::string_view text) {
  std::string material;
  material.reserve(backend_id.size() + src_lang.size() + tgt_lang.size() + text.size() + 3);
  material.append(backend_id).push_back('\x1f');
  material.append(src_lang).push_back('\x1f');
  material.append(tgt_lang).push_back('\x1f');
  material.append(text);
  return sha256_hex(material);
}

std::optional<std::string> TranslationCache::lookup(const std::string& key) {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void TranslationCache::insert(CacheRecord record) {
  std::unique_lock lock(mutex_);
  if (!entries_.try_emplace(record.key, record.translation).second) return;
  if (log_.is_open()) {
    const json j{{"key", record.key},
                 {"src_lang", record.src_lang},
                 {"tgt_lang", record.tgt_lang},
                 {"text", record.text},
                 {"translation", record.translation}};
    log_ << j.dump() << '\n';
    log_.flush();
  }
}

std::size_t TranslationCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

CachedTranslator::CachedTranslator(std::shared_ptr<Translator> inner,
                                   std::shared_ptr<TranslationCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<std::string> CachedTranslator::translate(std::span<const std::string> texts,
                                                     std::string_view src_lang,
                                                     std::string_view tgt_lang) {
  const std::string backend = inner_->id();
  std::vector<std::string> out(texts.size());
  std::vector<std::string> keys(texts.size());
  std::vector<std::string> pending;
  // Index of the first input carrying each pending text.
  std::unordered_map<std::string, std::size_t> pending_slot;
  std::vector<std::optional<std::size_t>> from_pending(texts.size());

  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = TranslationCache::make_key(backend, src_lang, tgt_lang, texts[i]);
    if (auto hit = cache_->lookup(keys[i])) {
      out[i] = std::move(*hit);
      continue;
    }
    const auto [it, inserted] = pending_slot.try_emplace(keys[i], pending.size());
    if (inserted) pending.push_back(texts[i]);
    from_pending[i] = it->second;
  }
  if (pending.empty()) return out;

  const auto fresh = inner_->translate(pending, src_lang, tgt_lang);
  if (fresh.size() != pending.size()) {
    throw ProtocolError("backend returned " + std::to_string(fresh.size()) + " translations for " +
                            std::to_string(pending.size()) + " inputs",
                        {});
  }
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (!from_pending[i]) continue;
    out[i] = fresh[*from_pending[i]];
    cache_->insert({keys[i], std::string(src_lang), std::string(tgt_lang), texts[i], out[i]});
  }
  return out;
}

}  // namespace btpoison
