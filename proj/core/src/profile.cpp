// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/profile.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "surveysim/csv.hpp"

namespace surveysim {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string normalize_placeholder(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    out.push_back(c == ' ' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string humanize(std::string_view name) {
  std::string out(name);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Two decimals at most, trailing zeros trimmed.
std::string prompt_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  std::string s(buf, end);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool term_holds(const ConstraintTerm& term, const AttributeValue& value) {
  if (const auto* label = std::get_if<std::string>(&term.match)) {
    const auto* v = std::get_if<std::string>(&value);
    return v != nullptr && *v == *label;
  }
  const auto& iv = std::get<Interval>(term.match);
  double x = 0;
  if (const auto* i = std::get_if<std::int64_t>(&value)) {
    x = static_cast<double>(*i);
  } else if (const auto* d = std::get_if<double>(&value)) {
    x = *d;
  } else {
    return false;
  }
  return x >= iv.low && x <= iv.high;
}

// Per-attribute view of the constraints, built once per sampling session.
struct CompiledSchema {
  struct Multiplier {
    std::size_t option;                         // index into the target's options
    std::vector<const ConstraintTerm*> conditions;  // terms on earlier attributes
    double factor;
  };
  const ProfileSchema* schema;
  std::vector<std::vector<Multiplier>> multipliers;  // indexed by attribute
  std::vector<const Constraint*> forbids;

  explicit CompiledSchema(const ProfileSchema& s) : schema(&s), multipliers(s.attributes.size()) {
    for (const auto& c : s.constraints) {
      if (c.kind == ConstraintKind::forbid) {
        forbids.push_back(&c);
        continue;
      }
      const ConstraintTerm* target = nullptr;
      std::size_t target_index = 0;
      for (const auto& t : c.terms) {
        const auto idx = *s.index_of(t.attribute);
        if (target == nullptr || idx > target_index) {
          target = &t;
          target_index = idx;
        }
      }
      const auto& spec = s.attributes[target_index];
      const auto& label = std::get<std::string>(target->match);
      Multiplier m{0, {}, c.factor};
      for (std::size_t k = 0; k < spec.options.size(); ++k) {
        if (spec.options[k].label == label) m.option = k;
      }
      for (const auto& t : c.terms) {
        if (&t != target) m.conditions.push_back(&t);
      }
      multipliers[target_index].push_back(std::move(m));
    }
  }
};

std::optional<AgentProfile> draw_once(const CompiledSchema& compiled, Rng& rng) {
  const auto& schema = *compiled.schema;
  AgentProfile profile;
  std::vector<double> weights;
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    const auto& spec = schema.attributes[a];
    switch (spec.kind) {
      case AttributeKind::categorical: {
        weights.clear();
        for (const auto& o : spec.options) weights.push_back(o.weight);
        for (const auto& m : compiled.multipliers[a]) {
          const bool applies = std::all_of(m.conditions.begin(), m.conditions.end(), [&](const ConstraintTerm* t) {
            auto it = profile.attributes.find(t->attribute);
            return it != profile.attributes.end() && term_holds(*t, it->second);
          });
          if (applies) weights[m.option] *= m.factor;
        }
        double total = 0;
        for (double w : weights) total += w;
        if (!(total > 0)) return std::nullopt;
        const double r = rng.uniform01() * total;
        double cumulative = 0;
        std::size_t pick = weights.size();
        for (std::size_t k = 0; k < weights.size(); ++k) {
          cumulative += weights[k];
          if (r < cumulative) {
            pick = k;
            break;
          }
        }
        if (pick == weights.size()) {
          // Rounding at the top end: take the last positive weight.
          for (std::size_t k = weights.size(); k-- > 0;) {
            if (weights[k] > 0) {
              pick = k;
              break;
            }
          }
        }
        profile.attributes.emplace(spec.name, spec.options[pick].label);
        break;
      }
      case AttributeKind::integer_range:
        profile.attributes.emplace(
            spec.name, rng.uniform_int(static_cast<std::int64_t>(spec.low), static_cast<std::int64_t>(spec.high)));
        break;
      case AttributeKind::real_range:
        profile.attributes.emplace(spec.name, rng.uniform_real(spec.low, spec.high));
        break;
      case AttributeKind::big5: {
        Big5 b;
        for (auto& t : b.traits) t = rng.uniform_real(0.0, 1.0);
        profile.attributes.emplace(spec.name, b);
        break;
      }
    }
  }
  for (const Constraint* f : compiled.forbids) {
    if (matches(*f, profile)) return std::nullopt;
  }
  return profile;
}

AgentProfile sample_compiled(const CompiledSchema& compiled, Rng& rng, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (auto p = draw_once(compiled, rng)) return std::move(*p);
  }
  std::string names;
  for (const auto& c : compiled.schema->constraints) {
    if (!names.empty()) names += "; ";
    names += c.describe();
  }
  throw UnsatisfiableConstraints("no profile satisfied the constraints within " + std::to_string(max_attempts) +
                                 " attempts: " + names);
}

// Sentence banks for storytelling mode. {n} is the humanized attribute name,
// {v} the rendered value, {u} the units (with a leading space when present).
constexpr std::array<std::string_view, 3> kOpeners = {
    "Let me tell you a little about myself.",
    "Here is a short description of who I am.",
    "A few things you should know about me.",
};
constexpr std::array<std::string_view, 3> kCategoricalSentences = {
    "My {n} is {v}.",
    "When it comes to {n}, I would say {v}.",
    "If you asked about my {n}, the answer is {v}.",
};
constexpr std::array<std::string_view, 3> kNumericSentences = {
    "My {n} is {v}{u}.",
    "I would put my {n} at {v}{u}.",
    "For {n}, I am at {v}{u}.",
};
constexpr std::array<std::string_view, 2> kBig5Sentences = {
    "People describe me as {b0} in openness, {b1} in conscientiousness, {b2} in extraversion, {b3} in "
    "agreeableness and {b4} in neuroticism.",
    "My personality is {b0} on openness, {b1} on conscientiousness, {b2} on extraversion, {b3} on "
    "agreeableness and {b4} on neuroticism.",
};

// Splits a template into literal runs and `<NAME>` placeholders.
template <typename OnLiteral, typename OnPlaceholder>
void scan_template(std::string_view text, OnLiteral&& on_literal, OnPlaceholder&& on_placeholder) {
  std::size_t i = 0;
  std::size_t literal_start = 0;
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == ' ')) {
      ++j;
    }
    if (j == i + 1 || j >= text.size() || text[j] != '>') {
      ++i;
      continue;
    }
    on_literal(text.substr(literal_start, i - literal_start));
    on_placeholder(text.substr(i + 1, j - i - 1));
    i = j + 1;
    literal_start = i;
  }
  on_literal(text.substr(literal_start));
}

const AttributeSpec* find_by_placeholder(const ProfileSchema& schema, const std::string& key) {
  for (const auto& a : schema.attributes) {
    if (normalize_placeholder(a.name) == key) return &a;
  }
  return nullptr;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::string_view big5_band(double trait) {
  if (trait < 1.0 / 3.0) return "low";
  if (trait < 2.0 / 3.0) return "moderate";
  return "high";
}

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::categorical: return "categorical";
    case AttributeKind::integer_range: return "integer-range";
    case AttributeKind::real_range: return "real-range";
    case AttributeKind::big5: return "big5";
  }
  return "?";
}

std::string_view to_string(NarrativeMode mode) {
  return mode == NarrativeMode::mechanistic ? "mechanistic" : "storytelling";
}

std::string Constraint::describe() const {
  std::string out = kind == ConstraintKind::forbid ? "forbid(" : "weight-multiplier(";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i != 0) out += " & ";
    out += terms[i].attribute;
    if (const auto* label = std::get_if<std::string>(&terms[i].match)) {
      out += "=" + *label;
    } else {
      const auto& iv = std::get<Interval>(terms[i].match);
      out += " in [" + shortest(iv.low) + "," + shortest(iv.high) + "]";
    }
  }
  if (kind == ConstraintKind::weight_multiplier) out += " x" + shortest(factor);
  return out + ")";
}

const AttributeSpec* ProfileSchema::find(std::string_view name) const {
  for (const auto& a : attributes) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::optional<std::size_t> ProfileSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == name) return i;
  }
  return std::nullopt;
}

ValidationReport validate_schema(const ProfileSchema& schema) {
  ValidationReport report;
  std::set<std::string, std::less<>> seen;
  for (const auto& a : schema.attributes) {
    if (!is_identifier(a.name)) {
      report.add(a.name, "attribute name is not an identifier");
    }
    if (!seen.insert(a.name).second) {
      report.add(a.name, "duplicate attribute name");
      continue;
    }
    switch (a.kind) {
      case AttributeKind::categorical: {
        if (a.options.empty()) {
          report.add(a.name, "categorical attribute has no options");
          break;
        }
        std::set<std::string, std::less<>> labels;
        double total = 0;
        bool bad_weight = false;
        for (const auto& o : a.options) {
          if (!labels.insert(o.label).second) report.add(a.name, "duplicate option \"" + o.label + "\"");
          if (o.label.empty()) report.add(a.name, "empty option label");
          if (!std::isfinite(o.weight) || o.weight < 0) bad_weight = true;
          else total += o.weight;
        }
        if (bad_weight) report.add(a.name, "weights must be finite and nonnegative");
        else if (!(total > 0)) report.add(a.name, "weights sum to zero");
        break;
      }
      case AttributeKind::integer_range:
        if (a.low != std::floor(a.low) || a.high != std::floor(a.high)) {
          report.add(a.name, "integer bounds must be whole numbers");
        }
        [[fallthrough]];
      case AttributeKind::real_range:
        if (!std::isfinite(a.low) || !std::isfinite(a.high)) report.add(a.name, "bounds must be finite");
        else if (a.low > a.high) report.add(a.name, "low bound exceeds high bound");
        break;
      case AttributeKind::big5:
        break;
    }
  }

  for (std::size_t ci = 0; ci < schema.constraints.size(); ++ci) {
    const auto& c = schema.constraints[ci];
    const std::string subject = "constraint " + std::to_string(ci) + " " + c.describe();
    if (c.terms.empty()) {
      report.add(subject, "constraint has no terms");
      continue;
    }
    bool terms_ok = true;
    std::set<std::string, std::less<>> term_attrs;
    for (const auto& t : c.terms) {
      const AttributeSpec* spec = schema.find(t.attribute);
      if (spec == nullptr) {
        report.add(subject, "references undeclared attribute \"" + t.attribute + "\"");
        terms_ok = false;
        continue;
      }
      if (!term_attrs.insert(t.attribute).second) {
        report.add(subject, "attribute \"" + t.attribute + "\" appears twice");
        terms_ok = false;
      }
      if (const auto* label = std::get_if<std::string>(&t.match)) {
        if (spec->kind != AttributeKind::categorical) {
          report.add(subject, "equality term on non-categorical attribute \"" + t.attribute + "\"");
          terms_ok = false;
        } else if (std::none_of(spec->options.begin(), spec->options.end(),
                                [&](const CategoryOption& o) { return o.label == *label; })) {
          report.add(subject, "\"" + *label + "\" is not an option of \"" + t.attribute + "\"");
          terms_ok = false;
        }
      } else {
        const auto& iv = std::get<Interval>(t.match);
        if (spec->kind != AttributeKind::integer_range && spec->kind != AttributeKind::real_range) {
          report.add(subject, "interval term on non-numeric attribute \"" + t.attribute + "\"");
          terms_ok = false;
        } else if (iv.low > iv.high) {
          report.add(subject, "interval low exceeds high");
          terms_ok = false;
        }
      }
    }
    if (c.kind == ConstraintKind::weight_multiplier) {
      if (!std::isfinite(c.factor) || c.factor < 0) report.add(subject, "factor must be finite and nonnegative");
      if (terms_ok) {
        const ConstraintTerm* target = nullptr;
        std::size_t target_index = 0;
        for (const auto& t : c.terms) {
          const auto idx = *schema.index_of(t.attribute);
          if (target == nullptr || idx > target_index) {
            target = &t;
            target_index = idx;
          }
        }
        if (!std::holds_alternative<std::string>(target->match)) {
          report.add(subject, "the latest-declared term must be a categorical equality");
        }
      }
    }
  }
  return report;
}

AgentProfile sample_conditional(const ProfileSchema& schema, Rng& rng, int max_attempts) {
  return sample_compiled(CompiledSchema(schema), rng, max_attempts);
}

std::uint64_t agent_seed(std::uint64_t run_seed, std::uint64_t index) { return mix64(run_seed, index); }

std::vector<AgentProfile> generate_population(const ProfileSchema& schema, std::size_t n, std::uint64_t seed) {
  if (auto report = validate_schema(schema); !report.ok()) throw ValidationError(std::move(report));
  const CompiledSchema compiled(schema);
  std::vector<AgentProfile> population;
  population.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t sub = agent_seed(seed, i);
    Rng rng(sub);
    AgentProfile p = sample_compiled(compiled, rng, kDefaultMaxSampleAttempts);
    p.agent_id = "a" + std::to_string(i);
    p.seed = sub;
    if (schema.narrative_mode == NarrativeMode::storytelling) p.narrative = compose_story(p, schema);
    population.push_back(std::move(p));
  }
  return population;
}

bool value_in_domain(const AttributeSpec& spec, const AttributeValue& value) {
  switch (spec.kind) {
    case AttributeKind::categorical: {
      const auto* v = std::get_if<std::string>(&value);
      return v != nullptr && std::any_of(spec.options.begin(), spec.options.end(),
                                         [&](const CategoryOption& o) { return o.label == *v; });
    }
    case AttributeKind::integer_range: {
      const auto* v = std::get_if<std::int64_t>(&value);
      return v != nullptr && static_cast<double>(*v) >= spec.low && static_cast<double>(*v) <= spec.high;
    }
    case AttributeKind::real_range: {
      const auto* v = std::get_if<double>(&value);
      return v != nullptr && *v >= spec.low && *v <= spec.high;
    }
    case AttributeKind::big5: {
      const auto* v = std::get_if<Big5>(&value);
      return v != nullptr &&
             std::all_of(v->traits.begin(), v->traits.end(), [](double t) { return t >= 0.0 && t <= 1.0; });
    }
  }
  return false;
}

bool matches(const Constraint& constraint, const AgentProfile& profile) {
  return std::all_of(constraint.terms.begin(), constraint.terms.end(), [&](const ConstraintTerm& t) {
    auto it = profile.attributes.find(t.attribute);
    return it != profile.attributes.end() && term_holds(t, it->second);
  });
}

std::string render_value(const AttributeSpec& spec, const AttributeValue& value) {
  (void)spec;
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return prompt_number(v);
        } else {
          std::string out;
          for (std::size_t i = 0; i < kBig5TraitNames.size(); ++i) {
            if (i != 0) out += ", ";
            out += std::string(kBig5TraitNames[i]) + " " + std::string(big5_band(v.traits[i]));
          }
          return out;
        }
      },
      value);
}

std::string compose_story(const AgentProfile& profile, const ProfileSchema& schema) {
  std::string out(kOpeners[mix64(profile.seed, 0xA11CE) % kOpeners.size()]);
  for (std::size_t i = 0; i < schema.attributes.size(); ++i) {
    const auto& spec = schema.attributes[i];
    auto it = profile.attributes.find(spec.name);
    if (it == profile.attributes.end()) continue;
    const std::uint64_t pick = mix64(profile.seed, i + 1);
    std::string sentence;
    switch (spec.kind) {
      case AttributeKind::categorical:
        sentence = kCategoricalSentences[pick % kCategoricalSentences.size()];
        break;
      case AttributeKind::integer_range:
      case AttributeKind::real_range:
        sentence = kNumericSentences[pick % kNumericSentences.size()];
        replace_all(sentence, "{u}", spec.units.empty() ? std::string() : " " + spec.units);
        break;
      case AttributeKind::big5: {
        sentence = kBig5Sentences[pick % kBig5Sentences.size()];
        const auto& b = std::get<Big5>(it->second);
        for (std::size_t t = 0; t < 5; ++t) {
          replace_all(sentence, "{b" + std::to_string(t) + "}", big5_band(b.traits[t]));
        }
        break;
      }
    }
    replace_all(sentence, "{n}", humanize(spec.name));
    replace_all(sentence, "{v}", render_value(spec, it->second));
    out += ' ';
    out += sentence;
  }
  return out;
}

std::string render_profile_prompt(const AgentProfile& profile, const ProfileSchema& schema,
                                  std::string_view template_text) {
  const bool story = schema.narrative_mode == NarrativeMode::storytelling;
  std::string paragraph;
  if (story) paragraph = profile.narrative ? *profile.narrative : compose_story(profile, schema);
  if (story && template_text.empty()) return paragraph;

  std::string out;
  bool story_used = false;
  scan_template(template_text, [&](std::string_view literal) { out += literal; },
                [&](std::string_view raw) {
                  const std::string key = normalize_placeholder(raw);
                  if (story && key == "STORY") {
                    out += paragraph;
                    story_used = true;
                    return;
                  }
                  const AttributeSpec* spec = find_by_placeholder(schema, key);
                  if (spec == nullptr) throw UnknownPlaceholder(std::string(raw));
                  auto it = profile.attributes.find(spec->name);
                  if (it == profile.attributes.end()) throw UnknownPlaceholder(std::string(raw));
                  out += render_value(*spec, it->second);
                });
  if (story && !story_used) {
    if (!out.empty()) out += "\n\n";
    out += paragraph;
  }
  return out;
}

std::vector<std::string> template_placeholders(std::string_view template_text) {
  std::vector<std::string> names;
  scan_template(template_text, [](std::string_view) {}, [&](std::string_view raw) { names.emplace_back(raw); });
  return names;
}

bool placeholder_resolves(const ProfileSchema& schema, std::string_view name) {
  const std::string key = normalize_placeholder(name);
  if (schema.narrative_mode == NarrativeMode::storytelling && key == "STORY") return true;
  return find_by_placeholder(schema, key) != nullptr;
}

std::string default_profile_template(const ProfileSchema& schema) {
  if (schema.narrative_mode == NarrativeMode::storytelling) return "<STORY>";
  std::string out;
  for (const auto& a : schema.attributes) {
    if (!out.empty()) out += ' ';
    const std::string placeholder = "<" + normalize_placeholder(a.name) + ">";
    switch (a.kind) {
      case AttributeKind::big5:
        out += "Your personality is " + placeholder + ".";
        break;
      case AttributeKind::integer_range:
      case AttributeKind::real_range:
        out += "Your " + humanize(a.name) + " is " + placeholder + (a.units.empty() ? "" : " " + a.units) + ".";
        break;
      case AttributeKind::categorical:
        out += "Your " + humanize(a.name) + " is " + placeholder + ".";
        break;
    }
  }
  return out;
}

// ---- population table ----------------------------------------------------

namespace {

std::string csv_value(const AttributeValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return shortest(v);
        } else {
          std::string out;
          for (std::size_t i = 0; i < v.traits.size(); ++i) {
            if (i != 0) out += '|';
            out += shortest(v.traits[i]);
          }
          return out;
        }
      },
      value);
}

std::optional<AttributeValue> parse_csv_value(const AttributeSpec& spec, std::string_view cell) {
  switch (spec.kind) {
    case AttributeKind::categorical:
      return AttributeValue(std::string(cell));
    case AttributeKind::integer_range:
      if (auto v = parse_int(cell)) return AttributeValue(*v);
      return std::nullopt;
    case AttributeKind::real_range:
      if (auto v = parse_double(cell)) return AttributeValue(*v);
      return std::nullopt;
    case AttributeKind::big5: {
      Big5 b;
      std::size_t start = 0;
      for (std::size_t t = 0; t < 5; ++t) {
        const std::size_t bar = cell.find('|', start);
        const bool last = t == 4;
        if (last != (bar == std::string_view::npos)) return std::nullopt;
        auto v = parse_double(cell.substr(start, last ? std::string_view::npos : bar - start));
        if (!v) return std::nullopt;
        b.traits[t] = *v;
        start = bar + 1;
      }
      return AttributeValue(b);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string population_to_csv(const std::vector<AgentProfile>& population, const ProfileSchema& schema) {
  const bool story = schema.narrative_mode == NarrativeMode::storytelling;
  csv::Row header{"agent_id", "seed"};
  for (const auto& a : schema.attributes) header.push_back(a.name);
  if (story) header.emplace_back("narrative");
  std::string out = csv::format_row(header);
  for (const auto& p : population) {
    csv::Row row{p.agent_id, std::to_string(p.seed)};
    for (const auto& a : schema.attributes) {
      auto it = p.attributes.find(a.name);
      row.push_back(it == p.attributes.end() ? std::string() : csv_value(it->second));
    }
    if (story) row.push_back(p.narrative.value_or(""));
    out += csv::format_row(row);
  }
  return out;
}

std::vector<AgentProfile> population_from_csv(std::string_view text, const ProfileSchema& schema) {
  const auto rows = csv::parse(text);
  std::vector<ParseError::Entry> errors;
  if (rows.empty()) throw ParseError({{1, "missing header row"}});
  const auto& header = rows.front();
  const bool story = schema.narrative_mode == NarrativeMode::storytelling;
  csv::Row expected{"agent_id", "seed"};
  for (const auto& a : schema.attributes) expected.push_back(a.name);
  if (story) expected.emplace_back("narrative");
  if (header != expected) throw ParseError({{1, "header does not match the profile schema"}});

  std::vector<AgentProfile> population;
  std::set<std::string, std::less<>> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != expected.size()) {
      errors.push_back({line, "expected " + std::to_string(expected.size()) + " fields, found " +
                                  std::to_string(row.size())});
      continue;
    }
    AgentProfile p;
    p.agent_id = row[0];
    if (p.agent_id.empty() || !ids.insert(p.agent_id).second) {
      errors.push_back({line, "agent_id empty or duplicated"});
      continue;
    }
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(row[1].data(), row[1].data() + row[1].size(), seed);
    if (ec != std::errc{} || ptr != row[1].data() + row[1].size()) {
      errors.push_back({line, "seed is not an unsigned integer"});
      continue;
    }
    p.seed = seed;
    bool ok = true;
    for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
      const auto& spec = schema.attributes[a];
      auto value = parse_csv_value(spec, row[a + 2]);
      if (!value || !value_in_domain(spec, *value)) {
        errors.push_back({line, "value \"" + row[a + 2] + "\" outside the domain of " + spec.name});
        ok = false;
        break;
      }
      p.attributes.emplace(spec.name, std::move(*value));
    }
    if (!ok) continue;
    if (story && !row.back().empty()) p.narrative = row.back();
    population.push_back(std::move(p));
  }
  if (!errors.empty()) throw ParseError(std::move(errors));
  return population;
}

// ---- structured text -----------------------------------------------------

namespace {

AttributeKind parse_kind(const std::string& s) {
  if (s == "categorical") return AttributeKind::categorical;
  if (s == "integer-range") return AttributeKind::integer_range;
  if (s == "real-range") return AttributeKind::real_range;
  if (s == "big5") return AttributeKind::big5;
  throw Error("unknown attribute kind \"" + s + "\"");
}

}  // namespace

void to_json(nlohmann::json& j, const ProfileSchema& schema) {
  j = nlohmann::json::object();
  j["narrative_mode"] = to_string(schema.narrative_mode);
  auto& attrs = j["attributes"] = nlohmann::json::array();
  for (const auto& a : schema.attributes) {
    nlohmann::json ja{{"name", a.name}, {"kind", to_string(a.kind)}};
    if (a.kind == AttributeKind::categorical) {
      auto& opts = ja["options"] = nlohmann::json::array();
      for (const auto& o : a.options) opts.push_back({{"label", o.label}, {"weight", o.weight}});
    } else if (a.kind != AttributeKind::big5) {
      if (a.kind == AttributeKind::integer_range) {
        ja["low"] = static_cast<std::int64_t>(a.low);
        ja["high"] = static_cast<std::int64_t>(a.high);
      } else {
        ja["low"] = a.low;
        ja["high"] = a.high;
      }
    }
    if (!a.units.empty()) ja["units"] = a.units;
    attrs.push_back(std::move(ja));
  }
  auto& cons = j["constraints"] = nlohmann::json::array();
  for (const auto& c : schema.constraints) {
    nlohmann::json jc{{"kind", c.kind == ConstraintKind::forbid ? "forbid" : "weight-multiplier"}};
    auto& when = jc["when"] = nlohmann::json::object();
    for (const auto& t : c.terms) {
      if (const auto* label = std::get_if<std::string>(&t.match)) {
        when[t.attribute] = *label;
      } else {
        const auto& iv = std::get<Interval>(t.match);
        when[t.attribute] = {iv.low, iv.high};
      }
    }
    if (c.kind == ConstraintKind::weight_multiplier) jc["factor"] = c.factor;
    cons.push_back(std::move(jc));
  }
}

void from_json(const nlohmann::json& j, ProfileSchema& schema) {
  schema = ProfileSchema{};
  const std::string mode = j.value("narrative_mode", "mechanistic");
  if (mode == "mechanistic") schema.narrative_mode = NarrativeMode::mechanistic;
  else if (mode == "storytelling") schema.narrative_mode = NarrativeMode::storytelling;
  else throw Error("unknown narrative_mode \"" + mode + "\"");

  for (const auto& ja : j.at("attributes")) {
    AttributeSpec a;
    a.name = ja.at("name").get<std::string>();
    a.kind = parse_kind(ja.at("kind").get<std::string>());
    a.units = ja.value("units", "");
    if (a.kind == AttributeKind::categorical) {
      for (const auto& o : ja.at("options")) {
        if (o.is_string()) a.options.push_back({o.get<std::string>(), 1.0});
        else a.options.push_back({o.at("label").get<std::string>(), o.value("weight", 1.0)});
      }
    } else if (a.kind != AttributeKind::big5) {
      a.low = ja.at("low").get<double>();
      a.high = ja.at("high").get<double>();
    }
    schema.attributes.push_back(std::move(a));
  }
  if (j.contains("constraints")) {
    for (const auto& jc : j.at("constraints")) {
      Constraint c;
      const std::string kind = jc.at("kind").get<std::string>();
      if (kind == "forbid") c.kind = ConstraintKind::forbid;
      else if (kind == "weight-multiplier") c.kind = ConstraintKind::weight_multiplier;
      else throw Error("unknown constraint kind \"" + kind + "\"");
      for (const auto& [attr, match] : jc.at("when").items()) {
        if (match.is_string()) {
          c.terms.push_back({attr, match.get<std::string>()});
        } else if (match.is_array() && match.size() == 2) {
          c.terms.push_back({attr, Interval{match[0].get<double>(), match[1].get<double>()}});
        } else {
          throw Error("constraint term for \"" + attr + "\" must be a label or a [low, high] pair");
        }
      }
      c.factor = jc.value("factor", 1.0);
      schema.constraints.push_back(std::move(c));
    }
  }
}

}  // namespace surveysim
