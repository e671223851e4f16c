// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "surveysim/errors.hpp"
#include "surveysim/manifest.hpp"

using namespace surveysim;
namespace fs = std::filesystem;

namespace {

RunManifest sample(const SimulationConfig& config) {
  RunManifest m;
  m.run_id = "run-1";
  m.config_hash = config_hash(config);
  m.directive_version = "answer-block/v1";
  m.total_jobs = 4;
  m.status = RunStatus::aborted;
  m.completed = {{"a0", "q0"}, {"a0", "q1"}};
  m.uncompleted = {{{"a1", "q0"}, "fatal: bad key", 1}, {{"a1", "q1"}, "not-attempted", 0}};
  m.cursor = {2, 0};
  m.failure = "fatal: bad key";
  return m;
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("surveysim-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Manifest, RoundTrips) {
  const auto config = surveysim::testing::demo_config(2);
  const auto m = sample(config);
  EXPECT_EQ(parse_manifest(serialize_manifest(m)), m);
}

TEST(Manifest, DetectsTamperingThroughChecksum) {
  const auto config = surveysim::testing::demo_config(2);
  std::string text = serialize_manifest(sample(config));
  const auto pos = text.find("\"a0\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 4, "\"a9\"");
  EXPECT_THROW((void)parse_manifest(text), ParseError);
}

TEST(Manifest, RejectsTruncatedSnapshot) {
  const auto config = surveysim::testing::demo_config(2);
  const std::string text = serialize_manifest(sample(config));
  EXPECT_THROW((void)parse_manifest(text.substr(0, text.size() / 2)), ParseError);
}

TEST(ManifestFile, FallsBackToPreviousSnapshotWhenLatestIsTorn) {
  const auto dir = temp_dir("manifest");
  const auto config = surveysim::testing::demo_config(2);
  ManifestFile file(dir / "manifest.json");
  auto first = sample(config);
  file.write(first);
  auto second = first;
  second.completed.insert({"a1", "q0"});
  file.write(second);
  EXPECT_EQ(file.load_latest(), second);

  {
    std::ofstream torn(dir / "manifest.json", std::ios::trunc);
    torn << "{\"format\": \"surveysim-manifest\", \"vers";
  }
  EXPECT_EQ(file.load_latest(), first);
  fs::remove_all(dir);
}

TEST(ManifestFile, MissingFileLoadsNothing) {
  const auto dir = temp_dir("manifest-missing");
  EXPECT_FALSE(load_manifest_file(dir / "nope.json").has_value());
  fs::remove_all(dir);
}

TEST(Resume, OneByTwoWithFirstDoneLeavesOnlyTheSecond) {
  auto config = surveysim::testing::demo_config(1);
  auto in = surveysim::testing::demo_inputs(config, 2);
  RunManifest m;
  m.config_hash = config_hash(config);
  m.completed = {{"a0", "q0"}};
  auto stream = make_resume_stream(m, config, in.population, in.survey);
  auto job = stream.next();
  ASSERT_TRUE(job.has_value());
  EXPECT_EQ(job->id(), (JobId{"a0", "q1"}));
  EXPECT_FALSE(stream.next().has_value());
}

TEST(Resume, AlreadySavedAnswersAreSkippedToo) {
  auto config = surveysim::testing::demo_config(2);
  auto in = surveysim::testing::demo_inputs(config, 2);
  RunManifest m;
  m.config_hash = config_hash(config);
  m.completed = {{"a0", "q0"}};
  auto stream = make_resume_stream(m, config, in.population, in.survey, {{"a1", "q1"}});
  std::vector<JobId> ids;
  while (auto j = stream.next()) ids.push_back(j->id());
  EXPECT_EQ(ids, (std::vector<JobId>{{"a0", "q1"}, {"a1", "q0"}}));
}

TEST(Resume, EditedConfigIsRefused) {
  auto config = surveysim::testing::demo_config(1);
  auto in = surveysim::testing::demo_inputs(config, 2);
  RunManifest m;
  m.config_hash = config_hash(config);
  config.temperature = 0.2;
  EXPECT_THROW((void)make_resume_stream(m, config, in.population, in.survey), ConfigMismatch);
}
