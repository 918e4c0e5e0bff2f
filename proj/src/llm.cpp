#include "ctxeval/llm.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

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

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::optional<double> parse_number(std::string_view text, bool allow_scientific) {
  text = trim(text);
  if (!is_decimal(text, allow_scientific)) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string context_body(const ContextBlocks& c) {
  std::string out;
  const auto add = [&](const char* label, const std::string& text) {
    if (text.empty()) return;
    if (!out.empty()) out += '\n';
    out += label;
    out += text;
  };
  add("Background: ", c.background);
  add("Scenario: ", c.scenario);
  add("Constraints: ", c.constraints_text);
  return out;
}

ParseOutcome reject(RejectReason r, std::string detail) {
  ParseOutcome out;
  out.reason = r;
  out.detail = std::move(detail);
  return out;
}

struct Tally {
  std::map<std::string, std::size_t> histogram;
  std::size_t attempts = 0;
  std::string last_reason;

  void note(RejectReason r) {
    last_reason = std::string(reject_reason_name(r));
    ++histogram[last_reason];
  }
};

[[noreturn]] void raise_failure(const char* method, std::size_t failed, std::size_t required,
                                Tally&& tally) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: %zu of %zu samples failed after %zu attempts", method,
                failed, required, tally.attempts);
  std::string what = buf;
  what += "; last reason: " + tally.last_reason;
  throw ForecastFailure(what, std::move(tally.histogram), tally.attempts,
                        std::move(tally.last_reason));
}

}  // namespace

void RetryPolicy::validate() const {
  if (max_attempts_per_sample < 1) throw std::invalid_argument("max_attempts_per_sample must be >= 1");
  if (samples_required < 2) throw std::invalid_argument("samples_required must be >= 2");
}

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::missing_tags: return "missing_tags";
    case RejectReason::extra_content: return "extra_content";
    case RejectReason::wrong_count: return "wrong_count";
    case RejectReason::timestamp_mismatch: return "timestamp_mismatch";
    case RejectReason::bad_number: return "bad_number";
    case RejectReason::endpoint_error: return "endpoint_error";
  }
  return "unknown";
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

bool is_decimal(std::string_view t, bool allow_scientific) {
  std::size_t i = 0;
  const std::size_t n = t.size();
  if (i < n && (t[i] == '+' || t[i] == '-')) ++i;
  std::size_t int_digits = 0, frac_digits = 0;
  while (i < n && t[i] >= '0' && t[i] <= '9') ++i, ++int_digits;
  if (i < n && t[i] == '.') {
    ++i;
    while (i < n && t[i] >= '0' && t[i] <= '9') ++i, ++frac_digits;
  }
  if (int_digits + frac_digits == 0) return false;
  if (allow_scientific && i < n && (t[i] == 'e' || t[i] == 'E')) {
    ++i;
    if (i < n && (t[i] == '+' || t[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < n && t[i] >= '0' && t[i] <= '9') ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == n;
}

// Direct Prompt -------------------------------------------------------------

std::string direct_prompt_render(const TaskInstance& instance) {
  std::string p;
  p += "I have a time series forecasting task for you.\n\n";
  p += "Here is some context about the task. Make sure to factor in any background knowledge, "
       "satisfy any constraints, and respect any scenarios.\n";
  p += "<context>\n" + context_body(instance.context) + "\n</context>\n\n";
  p += "Here is a historical time series in (timestamp, value) format:\n<history>\n";
  const auto& h = instance.history;
  for (std::size_t i = 0; i < h.size(); ++i) {
    p += "(" + h.timestamp(i).to_string() + ", " + format_value(h.values()[i]) + ")\n";
  }
  p += "</history>\n\n";
  p += "Now please predict the value at the following timestamps: [";
  for (std::size_t i = 0; i < instance.future.size(); ++i) {
    if (i > 0) p += ' ';
    p += "'" + instance.future.timestamp(i).to_string() + "'";
  }
  p += "].\n\n";
  p += "Return the forecast in (timestamp, value) format in between <forecast> and </forecast> "
       "tags.\n";
  p += "Do not include any other information (e.g., comments) in the forecast.\n\n";
  p += "Example:\n<history>\n(t1, v1)\n(t2, v2)\n(t3, v3)\n</history>\n";
  p += "<forecast>\n(t4, v4)\n(t5, v5)\n</forecast>\n";
  return p;
}

ParseOutcome direct_prompt_parse(std::string_view completion,
                                 const std::vector<Timestamp>& expected, bool allow_scientific) {
  constexpr std::string_view open = "<forecast>", close = "</forecast>";
  const auto b = completion.find(open);
  if (b == std::string_view::npos) return reject(RejectReason::missing_tags, "no <forecast> tag");
  const auto e = completion.find(close, b + open.size());
  if (e == std::string_view::npos) return reject(RejectReason::missing_tags, "no </forecast> tag");
  const std::string_view block = completion.substr(b + open.size(), e - b - open.size());

  // Tuples may sit one per line or back to back; anything else is extra content.
  std::vector<std::string_view> tuples;
  std::size_t i = 0;
  while (i < block.size()) {
    const char c = block[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    if (c != '(') {
      const auto eol = block.find('\n', i);
      return reject(RejectReason::extra_content,
                    std::string(trim(block.substr(i, eol == std::string_view::npos ? eol : eol - i))));
    }
    const auto end = block.find(')', i);
    const auto nested = block.find('(', i + 1);
    if (end == std::string_view::npos || (nested != std::string_view::npos && nested < end)) {
      return reject(RejectReason::extra_content, "unbalanced parenthesis");
    }
    const std::string_view inner = block.substr(i + 1, end - i - 1);
    if (inner.find(',') == std::string_view::npos || inner.find('\n') != std::string_view::npos) {
      return reject(RejectReason::extra_content, "(" + std::string(inner) + ")");
    }
    tuples.push_back(inner);
    i = end + 1;
  }

  if (tuples.size() != expected.size()) {
    return reject(RejectReason::wrong_count, "expected " + std::to_string(expected.size()) +
                                                 " values, got " + std::to_string(tuples.size()));
  }

  ParseOutcome out;
  out.values.reserve(tuples.size());
  for (std::size_t k = 0; k < tuples.size(); ++k) {
    const auto comma = tuples[k].find(',');
    const std::string_view ts_text = unquote(trim(tuples[k].substr(0, comma)));
    std::optional<Timestamp> ts;
    try {
      ts = Timestamp::parse(ts_text);
    } catch (const std::invalid_argument&) {
    }
    if (!ts || *ts != expected[k]) {
      return reject(RejectReason::timestamp_mismatch,
                    "position " + std::to_string(k) + ": got '" + std::string(ts_text) +
                        "', expected '" + expected[k].to_string() + "'");
    }
    const std::string_view v_text = tuples[k].substr(comma + 1);
    const auto v = parse_number(v_text, allow_scientific);
    if (!v) {
      return reject(RejectReason::bad_number, "'" + std::string(trim(v_text)) + "'");
    }
    out.values.push_back(*v);
  }
  return out;
}

ForecastEnsemble direct_prompt_forecast(CompletionEndpoint& endpoint, const TaskInstance& instance,
                                        const RetryPolicy& policy, std::uint64_t seed,
                                        const LlmOptions& options) {
  policy.validate();
  const std::string prompt = direct_prompt_render(instance);
  const std::vector<Timestamp> expected = instance.future.timestamps();
  const std::size_t horizon = expected.size();

  Tally tally;
  std::size_t failed = 0;
  std::vector<double> values;
  values.reserve(horizon * policy.samples_required);
  for (std::size_t m = 0; m < policy.samples_required; ++m) {
    bool done = false;
    for (std::size_t a = 0; a < policy.max_attempts_per_sample && !done; ++a) {
      ++tally.attempts;
      CompletionRequest req{
          .prompt = prompt,
          .stop = std::nullopt,
          .max_tokens = options.direct_max_tokens,
          .temperature = options.temperature,
          .seed = SeedSequence(seed).with("direct").with(m).with(a).value(),
      };
      std::string text;
      try {
        text = endpoint.complete(req);
      } catch (const EndpointError&) {
        tally.note(RejectReason::endpoint_error);
        continue;
      }
      ParseOutcome parsed = direct_prompt_parse(text, expected, options.allow_scientific);
      if (!parsed.ok()) {
        tally.note(*parsed.reason);
        continue;
      }
      values.insert(values.end(), parsed.values.begin(), parsed.values.end());
      done = true;
    }
    if (!done) ++failed;
  }
  if (failed > 0) raise_failure("direct prompt", failed, policy.samples_required, std::move(tally));
  return ForecastEnsemble(policy.samples_required, horizon, std::move(values));
}

// LLMP ----------------------------------------------------------------------

std::string llmp_render(const TaskInstance& instance) {
  std::string p;
  p += "Forecast the future values of this time series, while considering the following "
       "background knowledge, scenario, and constraints.\n\n";
  p += "Background knowledge:\n" + instance.context.background + "\n\n";
  p += "Scenario:\n" + instance.context.scenario + "\n\n";
  p += "Constraints:\n" + instance.context.constraints_text + "\n\n";
  const auto& h = instance.history;
  for (std::size_t i = 0; i < h.size(); ++i) {
    p += h.timestamp(i).to_string() + "," + format_value(h.values()[i]) + "\n";
  }
  p += instance.future.timestamp(0).to_string() + ",";
  return p;
}

std::optional<double> llmp_parse_value(std::string_view completion, bool allow_scientific) {
  const auto eol = completion.find('\n');
  if (eol != std::string_view::npos) completion = completion.substr(0, eol);
  return parse_number(completion, allow_scientific);
}

ForecastEnsemble llmp_forecast(CompletionEndpoint& endpoint, const TaskInstance& instance,
                               const RetryPolicy& policy, std::uint64_t seed,
                               const LlmOptions& options) {
  policy.validate();
  const std::string base = llmp_render(instance);
  const std::size_t horizon = instance.future.size();

  Tally tally;
  std::size_t failed = 0;
  std::vector<double> values;
  values.reserve(horizon * policy.samples_required);
  std::vector<double> path;
  for (std::size_t m = 0; m < policy.samples_required; ++m) {
    std::string prompt = base;
    path.clear();
    for (std::size_t h = 0; h < horizon; ++h) {
      std::optional<double> v;
      std::string token;
      for (std::size_t a = 0; a < policy.max_attempts_per_sample && !v; ++a) {
        ++tally.attempts;
        CompletionRequest req{
            .prompt = prompt,
            .stop = std::string("\n"),
            .max_tokens = options.llmp_max_tokens,
            .temperature = options.temperature,
            .seed = SeedSequence(seed).with("llmp").with(m).with(h).with(a).value(),
        };
        std::string text;
        try {
          text = endpoint.complete(req);
        } catch (const EndpointError&) {
          tally.note(RejectReason::endpoint_error);
          continue;
        }
        v = llmp_parse_value(text, options.allow_scientific);
        if (!v) {
          tally.note(RejectReason::bad_number);
          continue;
        }
        const auto eol = text.find('\n');
        token = std::string(trim(std::string_view(text).substr(0, eol)));
      }
      if (!v) break;
      path.push_back(*v);
      prompt += token + "\n";
      if (h + 1 < horizon) prompt += instance.future.timestamp(h + 1).to_string() + ",";
    }
    if (path.size() == horizon) {
      values.insert(values.end(), path.begin(), path.end());
    } else {
      ++failed;
    }
  }
  if (failed > 0) raise_failure("llmp", failed, policy.samples_required, std::move(tally));
  return ForecastEnsemble(policy.samples_required, horizon, std::move(values));
}

}  // namespace ctxeval
