// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <string>
#include <string_view>

namespace surveysim {

/// Lowercase hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view data);

/// `bytes` random bytes from the OS CSPRNG, hex encoded.
[[nodiscard]] std::string random_hex(std::size_t bytes);

}  // namespace surveysim
