// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "surveysim/profile.hpp"

namespace surveysim::cli {

ExitStatus cmd_generate_profiles(const GenerateOptions& o) {
  if (o.n < 0) {
    std::cerr << "-n must not be negative\n";
    return ExitStatus::invalid_input;
  }
  ProfileSchema schema;
  try {
    auto doc = nlohmann::json::parse(read_file(o.schema));
    // A full run configuration is accepted too.
    if (doc.is_object() && doc.contains("profile_schema")) doc = doc.at("profile_schema");
    schema = doc.get<ProfileSchema>();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "cannot read schema " << o.schema.string() << ": " << e.what() << '\n';
    return ExitStatus::invalid_input;
  } catch (const ValidationError& e) {
    std::cerr << "invalid schema " << o.schema.string() << ":\n";
    print_report(e.report());
    return ExitStatus::invalid_input;
  } catch (const Error& e) {
    std::cerr << "invalid schema " << o.schema.string() << ": " << e.what() << '\n';
    return ExitStatus::invalid_input;
  }

  const ValidationReport report = validate_schema(schema);
  if (!report.ok()) {
    std::cerr << "invalid schema " << o.schema.string() << ":\n";
    print_report(report);
    return ExitStatus::invalid_input;
  }

  std::vector<AgentProfile> agents;
  try {
    agents = generate_population(schema, static_cast<std::size_t>(o.n), o.seed);
  } catch (const UnsatisfiableConstraints& e) {
    std::cerr << e.what() << '\n';
    return ExitStatus::invalid_input;
  }

  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "cannot write " << o.out.string() << '\n';
    return ExitStatus::invalid_input;
  }
  out << population_to_csv(agents, schema);
  std::cout << agents.size() << " profiles written to " << o.out.string() << '\n';
  return ExitStatus::ok;
}

}  // namespace surveysim::cli
