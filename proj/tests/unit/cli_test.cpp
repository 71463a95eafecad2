/* Copyright 2026 The LSR Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "lsr/cli.hpp"
#include "lsr/io.hpp"

namespace lsr {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Data(const std::string& name) { return std::string(LSR_TEST_DATA_DIR) + "/" + name; }

TEST(Cli, MasrGoldens) {
  const Result r = Invoke({"masr", "--adapted", Data("iou_gtav_lsr_plus.csv"), "--supervised",
                        Data("iou_target_only.csv")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("mASR 69.5"), std::string::npos) << r.out;
  const Result s = Invoke({"masr", "--adapted", Data("iou_synthia_lsr_plus.csv"), "--supervised",
                        Data("iou_target_only.csv"), "--restrict",
                        "0,1,2,6,7,8,10,11,12,13,15,17,18"});
  EXPECT_EQ(s.code, kExitOk) << s.err;
  EXPECT_NE(s.out.find("mASR_restricted 62.1"), std::string::npos) << s.out;
}

TEST(Cli, EvalOfIdenticalMapsIsPerfect) {
  const fs::path path = fs::path(::testing::TempDir()) / "lsr_cli_map.lbl";
  io::SaveLabelMap(path, LabelMap(2, 3, 255, std::vector<int>{0, 1, 2, 3, 4, 0}));
  const Result r = Invoke({"eval", "--pred", path.string(), "--gt", path.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("mIoU 1.0000"), std::string::npos) << r.out;
  fs::remove(path);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"nosuch"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"config", "--set", "bogus=1"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"masr", "--adapted", "/nonexistent.csv", "--supervised", "/nonexistent.csv"})
                .code,
            kExitUsage);
  const fs::path bad = fs::path(::testing::TempDir()) / "lsr_cli_bad.csv";
  io::WriteTextFile(bad, "class_id,iou\n0,abc\n");
  EXPECT_EQ(Invoke({"masr", "--adapted", bad.string(), "--supervised", bad.string()}).code,
            kExitRuntime);
  fs::remove(bad);
  EXPECT_EQ(Invoke({"config"}).code, kExitOk);
}

TEST(Cli, HelpListsSubcommands) {
  const Result r = Invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  const std::string all = r.out + r.err;
  for (const char* name : {"gen", "train", "eval", "masr", "sweep", "gradcheck", "embed"}) {
    EXPECT_NE(all.find(name), std::string::npos) << name;
  }
}

TEST(Cli, GradcheckWritesCsv) {
  const fs::path dir = fs::path(::testing::TempDir()) / "lsr_cli_gc";
  fs::remove_all(dir);
  const Result r =
      Invoke({"gradcheck", "--loss", "em", "--instances", "3", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "gradcheck.csv"));
  fs::remove_all(dir);
}

TEST(Cli, ConfigSetOverridesAreEchoed) {
  const Result r = Invoke({"config", "--set", "loss.lambda_c=0.3", "--seed", "7"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("loss.lambda_c = 0.3"), std::string::npos);
  EXPECT_NE(r.out.find("seed = 7"), std::string::npos);
}

}  // namespace
}  // namespace lsr
