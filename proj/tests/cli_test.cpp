// Copyright 2026 The relaykey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "relaykey/cli.hpp"

namespace relaykey {
namespace {

namespace fs = std::filesystem;

const std::string kSamples = RELAYKEY_SAMPLES_DIR;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string FirstLine(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  TempDir() {
    const auto* info = testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("relaykey_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

ErrorCode CodeOf(const std::vector<std::string>& args) {
  try {
    ParseConfig(args);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kParseError;
}

TEST(ParseConfigTest, SweepFlags) {
  const RunConfig cfg =
      ParseConfig({"gaussian", "--mode", "alpha", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4",
                   "--rc", "1"});
  EXPECT_EQ(cfg.subcommand, "gaussian");
  const std::map<std::string, std::string> want{
      {"mode", "alpha"}, {"rho", "0.6"}, {"r1", "0.6"}, {"r2", "0.4"}, {"rc", "1"}};
  EXPECT_EQ(cfg.params, want);
  EXPECT_TRUE(cfg.output_path.empty());
}

TEST(ParseConfigTest, EqualsFormAndBareBool) {
  const RunConfig cfg = ParseConfig({"region", "--bound=inner", "--source", "dsbs:0.1",
                                     "--optimize", "--out", "x.csv"});
  EXPECT_EQ(cfg.params.at("bound"), "inner");
  EXPECT_EQ(cfg.params.at("optimize"), "true");
  EXPECT_EQ(cfg.output_path, "x.csv");
}

TEST(ParseConfigTest, MissingKeyNamesIt) {
  try {
    ParseConfig({"gaussian", "--mode", "alpha", "--r1", "0.6"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingKey);
    EXPECT_STREQ(e.what(), "MissingKey: rho");
  }
  const CliRun r = Invoke({"gaussian", "--mode", "alpha"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("MissingKey: rho"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(ParseConfigTest, FlagsOverrideFile) {
  TempDir dir;
  const fs::path file = dir.path() / "g.cfg";
  std::ofstream(file) << "# sweep\nmode = alpha\nrho = 0.5  # overridden\n\nr1=0.6\n";
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"gaussian", "--config", file.string(), "--rho", "0.6"},
           {"gaussian", "--rho", "0.6", "--config", file.string()}}) {
    const RunConfig cfg = ParseConfig(args);
    EXPECT_EQ(cfg.params.at("rho"), "0.6");
    EXPECT_EQ(cfg.params.at("mode"), "alpha");
    EXPECT_EQ(cfg.params.at("r1"), "0.6");
  }
  EXPECT_EQ(ParseConfig({"gaussian", "--config", file.string()}).params.at("rho"), "0.5");
}

TEST(ParseConfigTest, UsageErrors) {
  EXPECT_EQ(CodeOf({}), ErrorCode::kMissingKey);
  EXPECT_EQ(CodeOf({"plot"}), ErrorCode::kUnknownKey);
  EXPECT_EQ(CodeOf({"compare", "--rho", "0.6", "--r1", "1", "--r2", "1", "--rc", "1",
                    "--colour", "red"}),
            ErrorCode::kUnknownKey);
  EXPECT_EQ(CodeOf({"compare", "--rho", "abc", "--r1", "1", "--r2", "1", "--rc", "1"}),
            ErrorCode::kTypeError);
  EXPECT_EQ(CodeOf({"simulate", "--source", "dsbs:0.1", "--n", "4.5"}), ErrorCode::kTypeError);
  EXPECT_EQ(CodeOf({"simulate", "--source", "dsbs:0.1", "--n", "4", "--key_split", "0.1"}),
            ErrorCode::kTypeError);
  EXPECT_EQ(CodeOf({"gaussian", "--mode", "alpha", "--rho"}), ErrorCode::kTypeError);
  EXPECT_EQ(CodeOf({"selftest", "positional"}), ErrorCode::kUnknownKey);

  const CliRun r = Invoke({"compare", "--rho", "0.6", "--r1", "1", "--r2", "1", "--rc", "x"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("TypeError: rc"), std::string::npos) << r.err;
  EXPECT_EQ(Invoke({"region", "--bound", "inner"}).code, 2);
}

TEST(DispatchTest, CompareRow) {
  const CliRun r = Invoke({"compare", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4", "--rc", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "rho,r1,r2,rc,rk,c1to2,c2to1,strict\n"
            "0.6,0.6,0.4,1,0.25389732,0.198987793,0.154837575,true\n");
  const CliRun weak = Invoke({"compare", "--rho", "0.6", "--r1", "0", "--r2", "0.4", "--rc", "1"});
  EXPECT_NE(weak.out.find(",false\n"), std::string::npos) << weak.out;
}

TEST(DispatchTest, ComputationalErrorsExitOne) {
  const CliRun r = Invoke({"simulate", "--source", "dsbs:0.1", "--n", "12", "--trials", "10",
                        "--with_exact"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("EnumerationCapExceeded"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("enumeration cap of 10000000"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());

  const CliRun lowered = Invoke({"exact", "--source", "dsbs:0.1", "--n", "4",
                              "--enumeration_cap", "100"});
  EXPECT_EQ(lowered.code, 1);
  EXPECT_NE(lowered.err.find("cap of 100"), std::string::npos) << lowered.err;

  EXPECT_EQ(Invoke({"gaussian", "--mode", "alpha", "--rho", "1.5"}).code, 1);
  EXPECT_EQ(Invoke({"region", "--bound", "inner", "--source", "missing_file.txt"}).code, 1);
  EXPECT_EQ(Invoke({"region", "--bound", "inner", "--source", "dsbs:0.1", "--ch1", "w"}).code, 1);
}

TEST(DispatchTest, SelfTestPasses) {
  const CliRun r = Invoke({"selftest", "--instances", "40", "--seed", "5"});
  EXPECT_EQ(r.code, 0) << r.err << r.out;
  EXPECT_EQ(FirstLine(r.out), "check,instances,max_violation,passed");
  EXPECT_EQ(r.out.find(",false\n"), std::string::npos);
}

const std::vector<std::vector<std::string>>& Commands() {
  static const auto* cmds = new std::vector<std::vector<std::string>>{
      {"region", "--bound", "inner", "--source", kSamples + "/dsbs01.txt", "--ch1",
       kSamples + "/bsc015.txt"},
      {"region", "--bound", "outer", "--source", kSamples + "/dsbs01.txt", "--ch1", "bsc:0.1",
       "--ch2", "bsc:0.2"},
      {"region", "--bound", "common", "--source", kSamples + "/markov_xzy.txt", "--ch1", "z",
       "--ch2", "constant"},
      {"region", "--bound", "trusted", "--source", "dsbs:0.1", "--ch", "y"},
      {"region", "--bound", "reduced", "--source", "dsbs:0.1", "--ch1", "bsc:0.1"},
      {"region", "--bound", "inner", "--source", "dsbs:0.1", "--optimize", "--r1cap", "0.2",
       "--r2cap", "0.2", "--rccap", "0.3", "--restarts", "3"},
      {"region", "--bound", "inner", "--source", "dsbs:0.1", "--trace", "0.1,0.3",
       "--restarts", "2"},
      {"gaussian", "--config", kSamples + "/gaussian_alpha.cfg"},
      {"gaussian", "--config", kSamples + "/gaussian_beta.cfg"},
      {"gaussian", "--mode", "point", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4", "--rc",
       "1"},
      {"gaussian", "--mode", "point", "--rho", "0.6", "--nq1", "0.5", "--nq2", "2"},
      {"simulate", "--config", kSamples + "/simulate.cfg"},
      {"simulate", "--mode", "common", "--source", kSamples + "/markov_xzy.txt", "--ch1",
       "constant", "--ch2", "constant", "--n", "4", "--eps", "1", "--trials", "300"},
      {"simulate", "--mode", "trusted", "--source", "dsbs:0.1", "--n", "4", "--eps", "1",
       "--trials", "300"},
      {"exact", "--source", "dsbs:0.2", "--n", "4", "--eps", "1", "--master_seed", "11"},
      {"compare", "--rho", "0.6", "--r1", "0.6", "--r2", "0.4", "--rc", "1"},
      {"selftest", "--instances", "20"},
  };
  return *cmds;
}

TEST(DispatchTest, HeadersAndDeterminism) {
  const std::map<std::string, std::vector<std::string>> headers{
      {"region", {"bound,r1,r2,rc,rk,rk_alternate,channel_id"}},
      {"gaussian",
       {"alpha,rk,c1to2,c2to1,cstar", "beta,rk,c1to2,c2to1,cstar",
        "rho,nq1,nq2,r1,r2,rc,rk"}},
      {"simulate", {std::string(kSimReportHeader)}},
      {"exact", {std::string(kSimReportHeader)}},
      {"compare", {"rho,r1,r2,rc,rk,c1to2,c2to1,strict"}},
      {"selftest", {"check,instances,max_violation,passed"}},
  };
  for (const auto& args : Commands()) {
    SCOPED_TRACE(args[0] + " " + args[1] + " " + args[2]);
    const CliRun a = Invoke(args);
    const CliRun b = Invoke(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_TRUE(a.err.empty()) << a.err;
    const auto& allowed = headers.at(args[0]);
    EXPECT_NE(std::find(allowed.begin(), allowed.end(), FirstLine(a.out)), allowed.end())
        << FirstLine(a.out);
    EXPECT_EQ(a.out.back(), '\n');
  }
}

TEST(DispatchTest, NumbersUseNineSignificantDigits) {
  const CliRun r = Invoke({"gaussian", "--mode", "point", "--rho", "0.6", "--nq1", "0.3",
                        "--nq2", "0.7"});
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  std::istringstream cells(line);
  std::string cell;
  while (std::getline(cells, cell, ',')) {
    std::size_t digits = 0;
    bool leading = true;
    for (char c : cell) {
      if (c == 'e') break;
      if (c >= '1' && c <= '9') leading = false;
      if (!leading && c >= '0' && c <= '9') ++digits;
    }
    EXPECT_LE(digits, 9u) << cell;
  }
}

TEST(DispatchTest, OutputDirectoryFromEnvironment) {
  TempDir dir;
  const std::vector<std::string> args{"compare", "--rho", "0.6", "--r1", "0.6", "--r2",
                                      "0.4", "--rc", "1"};
  const std::string expected = Invoke(args).out;
  ASSERT_EQ(::setenv(std::string(kOutputDirEnv).c_str(), dir.path().c_str(), 1), 0);
  std::vector<std::string> with_out = args;
  with_out.insert(with_out.end(), {"--out", "cmp.csv"});
  const CliRun r = Invoke(with_out);
  ::unsetenv(std::string(kOutputDirEnv).c_str());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(ReadAll(dir.path() / "cmp.csv"), expected);

  const fs::path absolute = dir.path() / "abs.csv";
  with_out.back() = absolute.string();
  EXPECT_EQ(Invoke(with_out).code, 0);
  EXPECT_EQ(ReadAll(absolute), expected);
}

TEST(DispatchTest, SideFiles) {
  TempDir dir;
  const fs::path trace = dir.path() / "restarts.csv";
  const CliRun r = Invoke({"region", "--bound", "inner", "--source", "dsbs:0.1", "--optimize",
                        "--restarts", "3", "--opt_trace", trace.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string t = ReadAll(trace);
  EXPECT_EQ(FirstLine(t), "restart,seed,start_rk,best_rk,iterations");
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 4);

  const fs::path dump = dir.path() / "book.txt";
  const CliRun e = Invoke({"exact", "--source", "dsbs:0.2", "--n", "4", "--eps", "1",
                        "--dump_codebook", dump.string()});
  ASSERT_EQ(e.code, 0) << e.err;
  std::ifstream in(dump);
  const auto books = ReadCodebookDump(in);
  EXPECT_EQ(books.size(), 2u);
}

}  // namespace
}  // namespace relaykey
