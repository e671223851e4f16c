// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/provider.hpp"

namespace surveysim {

const std::vector<ProviderInfo>& provider_registry() {
  static const std::vector<ProviderInfo> registry{
      {"mock", 0.0, 2.0, "deterministic scripted provider for dry runs and tests"},
      {"openai", 0.0, 2.0, "OpenAI-compatible chat completions over HTTPS"},
  };
  return registry;
}

const ProviderInfo* find_provider(std::string_view id) {
  for (const auto& info : provider_registry()) {
    if (info.id == id) return &info;
  }
  return nullptr;
}

std::string_view to_string(ProviderErrorKind kind) {
  switch (kind) {
    case ProviderErrorKind::rate_limit: return "rate_limit";
    case ProviderErrorKind::transient: return "transient";
    case ProviderErrorKind::fatal: return "fatal";
  }
  return "?";
}

}  // namespace surveysim
