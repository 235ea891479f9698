#include <fstream>

#include "btpoison/backend.h"
#include "btpoison/error.h"

namespace btpoison {

std::shared_ptr<Translator> make_translator(std::string_view spec,
                                            const std::filesystem::path& cache_path,
                                            const HttpConfig& http) {
  std::shared_ptr<Translator> backend;
  if (spec.starts_with("stub:")) {
    const std::filesystem::path config_path{std::string(spec.substr(5))};
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open stub config " + config_path.string());
    try {
      backend = std::make_shared<StubTranslator>(nlohmann::json::parse(in).get<StubConfig>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed stub config " + config_path.string() + ": " + e.what());
    }
  } else if (spec.starts_with("http://") || spec.starts_with("https://")) {
    HttpConfig config = http;
    config.endpoint = std::string(spec);
    backend = std::make_shared<HttpTranslator>(std::move(config));
  } else {
    throw ConfigError("backend must be stub:CONFIG or a URL, got '" + std::string(spec) + "'");
  }
  if (cache_path.empty()) return backend;
  return std::make_shared<CachedTranslator>(std::move(backend),
                                            std::make_shared<TranslationCache>(cache_path));
}

std::shared_ptr<Generator> make_generator(std::string_view spec, const HttpConfig& http) {
  if (spec == "echo") return std::make_shared<EchoGenerator>();
  if (spec.starts_with("http://") || spec.starts_with("https://")) {
    HttpConfig config = http;
    config.endpoint = std::string(spec);
    return std::make_shared<HttpGenerator>(std::move(config));
  }
  throw ConfigError("generator must be echo or a URL, got '" + std::string(spec) + "'");
}

}  // namespace btpoison
