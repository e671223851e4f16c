// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/mock_provider.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace surveysim {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

constexpr std::array<std::string_view, 4> kReasons = {
    "This fits how I see things.",
    "It matches my own experience.",
    "That is what feels most true for me.",
    "I thought about it and this is my honest view.",
};

std::string wrap(const std::string& answer, Rng& rng) {
  const auto reason = kReasons[static_cast<std::size_t>(rng.uniform_int(0, kReasons.size() - 1))];
  return "```answer\nanswer: " + answer + "\nreasoning: " + std::string(reason) + "\n```";
}

std::string malformed_reply(const AnswerSchema& schema, Rng& rng) {
  switch (rng.uniform_int(0, 2)) {
    case 0:
      return "I would rather not commit to a single answer on this one.";
    case 1: {
      std::string bad;
      switch (schema.kind) {
        case AnswerKind::likert: bad = std::to_string(schema.scale_high + 1 + rng.uniform_int(0, 5)); break;
        case AnswerKind::numeric_range: bad = shortest(schema.bounds_high + 1.0 + rng.uniform_int(0, 100)); break;
        case AnswerKind::free_text: bad = ""; break;
        default: bad = "none of these"; break;
      }
      return wrap(bad, rng);
    }
    default:
      return "```answer\nreasoning: I forgot to give the answer field.\n```";
  }
}

std::string token_key(const JobId& job) { return job.agent_id + '\x1f' + job.question_id; }

}  // namespace

ValidationReport MockScript::validate() const {
  ValidationReport report;
  for (const auto& [job, outcomes] : responses) {
    if (outcomes.empty()) report.add("responses." + job.to_string(), "outcome sequence is empty");
  }
  if (!(failure_rate >= 0.0 && failure_rate <= 1.0)) report.add("failure_rate", "must lie in [0,1]");
  if (!(malformed_rate >= 0.0 && malformed_rate <= 1.0)) report.add("malformed_rate", "must lie in [0,1]");
  if (latency_min < Duration::zero() || latency_min > latency_max) {
    report.add("latency", "need 0 <= latency_min <= latency_max");
  }
  return report;
}

std::string synthesize_answer(const AnswerSchema& schema, Rng& rng) {
  std::string answer;
  switch (schema.kind) {
    case AnswerKind::single_choice:
      answer = schema.options[static_cast<std::size_t>(rng.uniform_int(0, schema.options.size() - 1))];
      break;
    case AnswerKind::multi_choice: {
      std::vector<std::string> picks;
      for (const auto& o : schema.options) {
        if (rng.bernoulli(0.5)) picks.push_back(o);
      }
      if (picks.empty()) picks.push_back(schema.options.front());
      for (std::size_t i = 0; i < picks.size(); ++i) {
        if (i != 0) answer += ", ";
        answer += picks[i];
      }
      break;
    }
    case AnswerKind::likert:
      answer = std::to_string(rng.uniform_int(schema.scale_low, schema.scale_high));
      break;
    case AnswerKind::numeric_range:
      answer = shortest(std::round(rng.uniform_real(schema.bounds_low, schema.bounds_high) * 100.0) / 100.0);
      // Rounding can step just past a bound.
      if (auto v = std::stod(answer); v < schema.bounds_low || v > schema.bounds_high) {
        answer = shortest(schema.bounds_low);
      }
      break;
    case AnswerKind::free_text:
      answer = "I feel fairly positive about it overall.";
      break;
  }
  return wrap(answer, rng);
}

MockProvider::MockProvider(MockScript script, std::uint64_t seed, Clock* clock)
    : script_(std::move(script)), seed_(seed), clock_(clock) {}

ProviderOutcome MockProvider::complete(const PromptPayload& payload, const Credentials&) {
  std::int64_t call = 0;
  {
    std::lock_guard lock(mutex_);
    call = calls_[payload.job]++;
  }
  Rng rng(mix64(mix64(seed_, hash_name(token_key(payload.job))), static_cast<std::uint64_t>(call)));

  const Duration latency =
      script_.latency_max > script_.latency_min
          ? script_.latency_min + Duration(rng.uniform_int(0, (script_.latency_max - script_.latency_min).count()))
          : script_.latency_min;
  if (latency > Duration::zero() && clock_ != nullptr) clock_->sleep_for(latency);

  ProviderOutcome outcome;
  std::string label;
  if (auto it = script_.responses.find(payload.job); it != script_.responses.end()) {
    const auto& seq = it->second;
    const auto& scripted = seq[std::min<std::size_t>(static_cast<std::size_t>(call), seq.size() - 1)];
    if (const auto* text = std::get_if<std::string>(&scripted)) {
      outcome = ProviderResult{*text, {}, latency};
      label = "ok";
    } else {
      outcome = std::get<ProviderError>(scripted);
      label = to_string(std::get<ProviderError>(scripted).kind);
    }
  } else if (rng.bernoulli(script_.failure_rate)) {
    outcome = ProviderError::transient("injected transient failure");
    label = "transient";
  } else if (rng.bernoulli(script_.malformed_rate)) {
    outcome = ProviderResult{malformed_reply(payload.answer_schema, rng), {}, latency};
    label = "malformed";
  } else {
    outcome = ProviderResult{synthesize_answer(payload.answer_schema, rng), {}, latency};
    label = "ok";
  }
  if (auto* result = std::get_if<ProviderResult>(&outcome)) {
    result->usage = TokenUsage{payload.estimated_tokens, estimate_tokens(result->text)};
  }
  {
    std::lock_guard lock(mutex_);
    log_.push_back({payload.job, call, label});
  }
  return outcome;
}

std::vector<MockCall> MockProvider::transcript() const {
  std::lock_guard lock(mutex_);
  auto out = log_;
  std::sort(out.begin(), out.end(), [](const MockCall& a, const MockCall& b) {
    return std::tie(a.job, a.call_index) < std::tie(b.job, b.call_index);
  });
  return out;
}

std::int64_t MockProvider::call_count() const {
  std::lock_guard lock(mutex_);
  return static_cast<std::int64_t>(log_.size());
}

std::unique_ptr<MockProvider> make_mock(MockScript script, std::uint64_t seed, Clock* clock) {
  if (auto report = script.validate(); !report.ok()) throw ValidationError(std::move(report));
  return std::make_unique<MockProvider>(std::move(script), seed, clock);
}

void from_json(const nlohmann::json& j, MockScript& script) {
  script = MockScript{};
  script.failure_rate = j.value("failure_rate", 0.0);
  script.malformed_rate = j.value("malformed_rate", 0.0);
  const auto ms = [](double v) {
    return std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::milli>(v));
  };
  script.latency_min = ms(j.value("latency_min_ms", 0.0));
  script.latency_max = ms(j.value("latency_max_ms", j.value("latency_min_ms", 0.0)));
  if (!j.contains("responses")) return;
  for (const auto& [key, seq] : j.at("responses").items()) {
    const auto slash = key.find('/');
    if (slash == std::string::npos) throw Error("mock response key \"" + key + "\" must be agent_id/question_id");
    JobId job{key.substr(0, slash), key.substr(slash + 1)};
    std::vector<MockOutcome> outcomes;
    for (const auto& o : seq) {
      if (o.is_string()) {
        outcomes.emplace_back(o.get<std::string>());
      } else if (o.contains("text")) {
        outcomes.emplace_back(o.at("text").get<std::string>());
      } else {
        const std::string kind = o.at("error").get<std::string>();
        const std::string detail = o.value("detail", "scripted " + kind + " error");
        if (kind == "rate_limit") {
          std::optional<Duration> after;
          if (o.contains("retry_after")) after = ms(o.at("retry_after").get<double>() * 1000.0);
          outcomes.emplace_back(ProviderError::rate_limit(after, detail));
        } else if (kind == "transient") {
          outcomes.emplace_back(ProviderError::transient(detail));
        } else if (kind == "fatal") {
          outcomes.emplace_back(ProviderError::fatal(detail));
        } else {
          throw Error("unknown mock error kind \"" + kind + "\"");
        }
      }
    }
    script.responses.emplace(std::move(job), std::move(outcomes));
  }
}

MockScript parse_mock_script(std::string_view text) {
  try {
    auto script = nlohmann::json::parse(text).get<MockScript>();
    if (auto report = script.validate(); !report.ok()) throw ValidationError(std::move(report));
    return script;
  } catch (const nlohmann::json::exception& e) {
    ValidationReport report;
    report.add("mock_script", e.what());
    throw ValidationError(std::move(report));
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    ValidationReport report;
    report.add("mock_script", e.what());
    throw ValidationError(std::move(report));
  }
}

}  // namespace surveysim
