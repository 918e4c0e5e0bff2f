#include "ctxeval/endpoints.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "ctxeval/errors.hpp"
#include "ctxeval/random.hpp"

namespace ctxeval {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!is_decimal(s, true)) return std::nullopt;
  return std::strtod(std::string(s).c_str(), nullptr);
}

double jitter_sd(const std::vector<double>& history, double jitter) {
  if (history.empty() || jitter <= 0.0) return 0.0;
  const auto [lo, hi] = std::minmax_element(history.begin(), history.end());
  return jitter * (*hi - *lo);
}

/// Persistence reply for either prompt layout.
std::string persistence_reply(const CompletionRequest& req, double jitter) {
  const std::string& p = req.prompt;
  Rng rng(req.seed.value_or(fnv1a(p)));
  std::vector<double> history;

  const auto hb = p.find("<history>\n");
  const auto pt = p.find("following timestamps: [");
  if (hb != std::string::npos && pt != std::string::npos) {
    const auto he = p.find("</history>", hb);
    std::string_view block = std::string_view(p).substr(hb, he - hb);
    for (std::size_t i = block.find('('); i != std::string_view::npos; i = block.find('(', i + 1)) {
      const auto close = block.find(')', i);
      const auto comma = block.find(',', i);
      if (close == std::string_view::npos || comma > close) break;
      if (auto v = to_double(block.substr(comma + 1, close - comma - 1))) history.push_back(*v);
    }
    std::vector<std::string> stamps;
    const auto list_end = p.find(']', pt);
    for (std::size_t i = p.find('\'', pt); i != std::string::npos && i < list_end;) {
      const auto j = p.find('\'', i + 1);
      stamps.push_back(p.substr(i + 1, j - i - 1));
      i = p.find('\'', j + 1);
    }
    const double last = history.empty() ? 0.0 : history.back();
    const double sd = jitter_sd(history, jitter);
    std::string out = "<forecast>\n";
    for (const auto& s : stamps) out += "(" + s + ", " + format_value(last + sd * rng.normal()) + ")\n";
    out += "</forecast>";
    return out;
  }

  // Autoregressive layout: "timestamp,value" lines.
  std::size_t start = 0;
  while (start < p.size()) {
    auto end = p.find('\n', start);
    if (end == std::string::npos) end = p.size();
    std::string_view line = std::string_view(p).substr(start, end - start);
    const auto comma = line.find(',');
    if (comma != std::string_view::npos && line.find(',', comma + 1) == std::string_view::npos) {
      if (auto v = to_double(line.substr(comma + 1))) history.push_back(*v);
    }
    start = end + 1;
  }
  const double last = history.empty() ? 0.0 : history.back();
  return format_value(last + jitter_sd(history, jitter) * rng.normal()) + "\n";
}

MockRule rule_from_json(const Json& r) {
  if (!r.is_object()) throw ConfigError("mock rule must be an object");
  MockRule rule;
  if (r.contains("match")) rule.match = r.at("match").get<std::string>();
  if (r.contains("prompt_substring_match")) rule.match = r.at("prompt_substring_match").get<std::string>();
  if (r.contains("suffix")) rule.suffix = r.at("suffix").get<std::string>();
  if (r.contains("prompt_hash")) {
    const auto text = r.at("prompt_hash").get<std::string>();
    char* end = nullptr;
    rule.prompt_hash = std::strtoull(text.c_str(), &end, 16);
    if (text.empty() || *end != '\0') throw ConfigError("prompt_hash must be hex: " + text);
  }
  if (r.contains("response")) rule.responses.push_back(r.at("response").get<std::string>());
  if (r.contains("responses")) {
    for (const auto& s : r.at("responses")) rule.responses.push_back(s.get<std::string>());
  }
  if (r.contains("generate")) {
    rule.generate = r.at("generate").get<std::string>();
    if (*rule.generate != "persistence") throw ConfigError("unknown mock generator: " + *rule.generate);
  }
  if (r.contains("jitter")) rule.jitter = r.at("jitter").get<double>();
  if (rule.responses.empty() && !rule.generate) {
    throw ConfigError("mock rule needs \"response\", \"responses\" or \"generate\"");
  }
  return rule;
}

}  // namespace

// Mock ----------------------------------------------------------------------

MockEndpoint::MockEndpoint(std::vector<MockRule> rules) : rules_(std::move(rules)) {}

std::vector<MockRule> mock_rules_from_json(const Json& script) {
  if (!script.is_array()) throw ConfigError("mock script must be a JSON array");
  std::vector<MockRule> rules;
  try {
    for (const auto& r : script) rules.push_back(rule_from_json(r));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad mock script: ") + e.what());
  }
  return rules;
}

MockEndpoint MockEndpoint::from_json(const Json& script) {
  return MockEndpoint(mock_rules_from_json(script));
}

MockEndpoint MockEndpoint::from_file(const std::string& path) {
  return MockEndpoint(mock_rules_from_json(read_json_file(path)));
}

std::string MockEndpoint::complete(const CompletionRequest& request) {
  const std::string& p = request.prompt;
  const std::uint64_t hash = fnv1a(p);
  for (std::size_t k = 0; k < rules_.size(); ++k) {
    const MockRule& r = rules_[k];
    if (!r.match.empty() && p.find(r.match) == std::string::npos) continue;
    if (r.suffix && !(p.size() >= r.suffix->size() &&
                      p.compare(p.size() - r.suffix->size(), r.suffix->size(), *r.suffix) == 0)) {
      continue;
    }
    if (r.prompt_hash && *r.prompt_hash != hash) continue;

    std::size_t n;
    {
      std::lock_guard lock(mu_);
      log_.push_back(request);
      n = counters_[{k, hash}]++;
    }
    if (r.generate) return persistence_reply(request, r.jitter);
    return r.responses[n % r.responses.size()];
  }
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  throw EndpointError(std::string("no mock rule matches prompt ") + buf);
}

void MockEndpoint::reset() {
  std::lock_guard lock(mu_);
  counters_.clear();
  log_.clear();
}

std::size_t MockEndpoint::calls() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::vector<CompletionRequest> MockEndpoint::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

// HTTP ----------------------------------------------------------------------

void HttpEndpointConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw ConfigError("base_url must start with http:// or https://: " + base_url);
  }
  if (model.empty()) throw ConfigError("http endpoint needs a model name");
  if (max_concurrent < 1) throw ConfigError("max_concurrent must be >= 1");
  if (min_interval_seconds < 0.0) throw ConfigError("min_interval_seconds must be >= 0");
  if (!(timeout_seconds > 0.0)) throw ConfigError("timeout_seconds must be > 0");
}

HttpEndpoint::HttpEndpoint(HttpEndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto host_start = config_.base_url.find("://") + 3;
  const auto slash = config_.base_url.find('/', host_start);
  scheme_host_port_ = config_.base_url.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? "" : config_.base_url.substr(slash);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (config_.base_url.rfind("https://", 0) == 0) {
    throw ConfigError("https endpoints need a build with OpenSSL");
  }
#endif
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) {
      throw ConfigError("environment variable " + config_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
}

std::string HttpEndpoint::complete(const CompletionRequest& request) {
  using clock = std::chrono::steady_clock;
  // Concurrency cap plus a minimum spacing between request starts.
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < config_.max_concurrent; });
    ++in_flight_;
    const auto now = clock::now();
    const auto start = std::max(now, next_start_);
    next_start_ = start + std::chrono::duration_cast<clock::duration>(
                              std::chrono::duration<double>(config_.min_interval_seconds));
    lock.unlock();
    std::this_thread::sleep_until(start);
  }
  struct Release {
    HttpEndpoint* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  Json body;
  body["model"] = config_.model;
  std::string path = path_prefix_;
  if (config_.api == HttpApi::chat) {
    body["messages"] = Json::array({Json{{"role", "user"}, {"content", request.prompt}}});
    path += "/chat/completions";
  } else {
    body["prompt"] = request.prompt;
    path += "/completions";
  }
  body["max_tokens"] = request.max_tokens;
  body["temperature"] = request.temperature;
  if (request.seed) body["seed"] = *request.seed;
  if (request.stop) body["stop"] = *request.stop;

  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw EndpointError("request to " + scheme_host_port_ + path +
                        " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw EndpointError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                        res->body.substr(0, 200));
  }
  try {
    const Json reply = Json::parse(res->body);
    const Json& choice = reply.at("choices").at(0);
    if (config_.api == HttpApi::chat) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw EndpointError(std::string("malformed endpoint reply: ") + e.what());
  }
}

HttpEndpointConfig http_config_from_json(const Json& j) {
  HttpEndpointConfig c;
  try {
    c.base_url = j.at("base_url").get<std::string>();
    c.model = j.at("model").get<std::string>();
    if (j.contains("api")) {
      const auto api = j.at("api").get<std::string>();
      if (api == "chat") {
        c.api = HttpApi::chat;
      } else if (api == "completions") {
        c.api = HttpApi::completions;
      } else {
        throw ConfigError("api must be \"chat\" or \"completions\": " + api);
      }
    }
    if (j.contains("api_key_env")) c.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("max_concurrent")) c.max_concurrent = j.at("max_concurrent").get<std::size_t>();
    if (j.contains("min_interval_seconds")) {
      c.min_interval_seconds = j.at("min_interval_seconds").get<double>();
    }
    if (j.contains("timeout_seconds")) c.timeout_seconds = j.at("timeout_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad http endpoint config: ") + e.what());
  }
  c.validate();
  return c;
}

std::unique_ptr<CompletionEndpoint> make_endpoint(const Json& j) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError("endpoint config needs a \"type\"");
  const auto type = j.at("type").get<std::string>();
  if (type == "mock") {
    if (j.contains("script")) return std::make_unique<MockEndpoint>(mock_rules_from_json(j.at("script")));
    if (j.contains("script_file")) {
      return std::make_unique<MockEndpoint>(
          mock_rules_from_json(read_json_file(j.at("script_file").get<std::string>())));
    }
    throw ConfigError("mock endpoint needs \"script\" or \"script_file\"");
  }
  if (type == "http") return std::make_unique<HttpEndpoint>(http_config_from_json(j));
  throw ConfigError("unknown endpoint type: " + type);
}

}  // namespace ctxeval
