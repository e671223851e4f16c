// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveysim/errors.hpp"
#include "surveysim/rng.hpp"

namespace surveysim {

enum class AttributeKind { categorical, integer_range, real_range, big5 };

struct CategoryOption {
  std::string label;
  double weight = 1.0;

  bool operator==(const CategoryOption&) const = default;
};

/// One sampled dimension of an agent. Categorical attributes use `options`;
/// numeric ones use the inclusive `[low, high]` bounds.
struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::categorical;
  std::vector<CategoryOption> options;
  double low = 0.0;
  double high = 0.0;
  std::string units;

  bool operator==(const AttributeSpec&) const = default;
};

/// Five personality traits in [0, 1], in the order of `kBig5TraitNames`.
struct Big5 {
  std::array<double, 5> traits{};

  bool operator==(const Big5&) const = default;
};

inline constexpr std::array<std::string_view, 5> kBig5TraitNames = {
    "openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"};

/// "low" below 1/3, "high" from 2/3, "moderate" in between.
[[nodiscard]] std::string_view big5_band(double trait);

using AttributeValue = std::variant<std::string, std::int64_t, double, Big5>;

struct Interval {
  double low = 0.0;
  double high = 0.0;

  bool operator==(const Interval&) const = default;
};

struct ConstraintTerm {
  std::string attribute;
  std::variant<std::string, Interval> match;

  bool operator==(const ConstraintTerm&) const = default;
};

enum class ConstraintKind { forbid, weight_multiplier };

/// A conjunction of terms. Forbid constraints reject any profile matching all
/// terms. A weight multiplier scales the weight of its target option (the term
/// on the latest-declared attribute) when the remaining terms already hold.
struct Constraint {
  ConstraintKind kind = ConstraintKind::forbid;
  std::vector<ConstraintTerm> terms;
  double factor = 1.0;

  bool operator==(const Constraint&) const = default;
  [[nodiscard]] std::string describe() const;
};

enum class NarrativeMode { mechanistic, storytelling };

struct ProfileSchema {
  std::vector<AttributeSpec> attributes;
  std::vector<Constraint> constraints;
  NarrativeMode narrative_mode = NarrativeMode::mechanistic;

  bool operator==(const ProfileSchema&) const = default;

  [[nodiscard]] const AttributeSpec* find(std::string_view name) const;
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;
};

struct AgentProfile {
  std::string agent_id;
  std::map<std::string, AttributeValue, std::less<>> attributes;
  std::optional<std::string> narrative;
  std::uint64_t seed = 0;

  bool operator==(const AgentProfile&) const = default;
};

inline constexpr int kDefaultMaxSampleAttempts = 1000;

[[nodiscard]] ValidationReport validate_schema(const ProfileSchema& schema);

/// Draws one profile. Attributes are drawn in declared order with weight
/// multipliers applied to each categorical draw; any profile matching a forbid
/// constraint is discarded and redrawn. Throws UnsatisfiableConstraints after
/// `max_attempts` discarded draws. The returned profile has no id or seed.
[[nodiscard]] AgentProfile sample_conditional(const ProfileSchema& schema, Rng& rng,
                                              int max_attempts = kDefaultMaxSampleAttempts);

/// Sub-seed for agent `index` of a run. Independent of population size, so
/// populations of different sizes share a prefix.
[[nodiscard]] std::uint64_t agent_seed(std::uint64_t run_seed, std::uint64_t index);

/// Throws ValidationError on an invalid schema, UnsatisfiableConstraints when
/// an agent cannot be drawn.
[[nodiscard]] std::vector<AgentProfile> generate_population(const ProfileSchema& schema,
                                                            std::size_t n, std::uint64_t seed);

[[nodiscard]] bool value_in_domain(const AttributeSpec& spec, const AttributeValue& value);
[[nodiscard]] bool matches(const Constraint& constraint, const AgentProfile& profile);

/// Prompt text for a value: the category label, the number, or a comma list
/// of big-five bands ("openness high, ...").
[[nodiscard]] std::string render_value(const AttributeSpec& spec, const AttributeValue& value);

/// Deterministic storytelling paragraph; sentence variants are picked from a
/// fixed bank using the profile seed.
[[nodiscard]] std::string compose_story(const AgentProfile& profile, const ProfileSchema& schema);

/// Mechanistic mode replaces every `<NAME>` placeholder (matched against
/// attribute names case-insensitively, with spaces equivalent to
/// underscores). Storytelling mode additionally replaces `<STORY>` with the
/// composed paragraph; an empty template yields the paragraph alone and a
/// template without `<STORY>` gets it appended. Throws UnknownPlaceholder.
[[nodiscard]] std::string render_profile_prompt(const AgentProfile& profile,
                                                const ProfileSchema& schema,
                                                std::string_view template_text);

/// Placeholder names (the raw text between angle brackets) in template order.
/// A '<' that does not open a `<NAME>` token is literal text.
[[nodiscard]] std::vector<std::string> template_placeholders(std::string_view template_text);

/// True when `name` refers to a declared attribute, or is STORY in
/// storytelling mode.
[[nodiscard]] bool placeholder_resolves(const ProfileSchema& schema, std::string_view name);

/// Default mechanistic template: one clause per attribute, each placeholder
/// used once.
[[nodiscard]] std::string default_profile_template(const ProfileSchema& schema);

/// Table with columns agent_id, seed, one per attribute, then narrative when
/// the schema is in storytelling mode.
[[nodiscard]] std::string population_to_csv(const std::vector<AgentProfile>& population,
                                            const ProfileSchema& schema);
/// Inverse of population_to_csv. Throws ParseError on malformed rows or
/// out-of-domain values.
[[nodiscard]] std::vector<AgentProfile> population_from_csv(std::string_view text,
                                                            const ProfileSchema& schema);

void to_json(nlohmann::json& j, const ProfileSchema& schema);
void from_json(const nlohmann::json& j, ProfileSchema& schema);

[[nodiscard]] std::string_view to_string(AttributeKind kind);
[[nodiscard]] std::string_view to_string(NarrativeMode mode);

}  // namespace surveysim
