#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "dfpi/dfpi.hpp"
#include "dfpi/problems.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run dfpi_cmd(std::vector<std::string> args) {
  args.insert(args.begin(), "dfpi");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / "dfpi_cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = scratch(name);
  std::ofstream(path) << text;
  return path.string();
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Row {
  double iter;
  double residual;
  std::size_t trouble;
  std::string event;
};

std::vector<Row> parse_trace(const std::string& csv) {
  const auto ls = lines_of(csv);
  EXPECT_FALSE(ls.empty());
  EXPECT_EQ(ls.front(), "iter,residual_2norm,trouble_size,event");
  std::vector<Row> rows;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = fields(ls[i]);
    EXPECT_EQ(f.size(), 4u) << ls[i];
    rows.push_back({std::stod(f[0]), std::stod(f[1]), std::stoul(f[2]), f[3]});
  }
  return rows;
}

std::string identity_matrix() {
  return write_file("identity.mtx",
                    "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n");
}

TEST(CliSolve, IdentitySystemGivesTwoRows) {
  for (const char* solver : {"dfpi", "richardson"}) {
    const auto r = dfpi_cmd({"solve", "--matrix", identity_matrix(), "--precond", "identity", "--solver", solver});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto ls = lines_of(r.out);
    ASSERT_EQ(ls.size(), 3u) << r.out;
    EXPECT_EQ(ls[1], "0,1.7320508075688772,0,");
    EXPECT_EQ(ls[2], "1,0,0,");
  }
}

TEST(CliSolve, DivergentRichardsonRecordsGrowth) {
  const auto r = dfpi_cmd({"solve", "--problem", "prescribed:n=20,bad=2,q=0.5,rho=1.8", "--precond", "identity",
                           "--solver", "richardson", "--max-iter", "60"});
  EXPECT_TRUE(r.code == 2 || r.code == 3) << r.code;
  const auto rows = parse_trace(r.out);
  ASSERT_GT(rows.size(), 2u);
  EXPECT_GT(rows.back().residual, 100.0 * rows.front().residual);
}

TEST(CliSolve, BoostConvTraceIsTheLibraryTrace) {
  const auto r = dfpi_cmd({"solve", "--problem", "cd1d:n=60,pe=20", "--precond", "jacobi", "--solver", "dfpi",
                           "--recruit", "boostconv", "--project", "lsq-a"});
  ASSERT_EQ(r.code, 0) << r.err;

  const auto a = gen_cd1d(60, 20.0).a;
  const auto p = Preconditioner::jacobi(a);
  TroubleSpace ts(a, p, ProjectionMode::lsq_a);
  Recruiter rec(StrategyConfig{});
  const auto res = dfpi_solve(a, Vector(60, 1.0), Vector(60, 0.0), p, ts, rec, SolverOptions{});
  std::ostringstream expect;
  cli::write_trace_csv(res.trace, expect);
  EXPECT_EQ(r.out, expect.str());

  const auto rows = parse_trace(r.out);
  ASSERT_EQ(rows.size(), res.trace.records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].residual, res.trace.records[i].residual_2norm);
}

TEST(CliSolve, HalfStepsCarryHalfIndices) {
  const auto r = dfpi_cmd({"solve", "--problem", "cd1d:n=40,pe=20", "--recruit", "aaos"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_trace(r.out);
  std::size_t halves = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].iter != std::floor(rows[i].iter)) ++halves;
    if (i > 0) EXPECT_GT(rows[i].iter, rows[i - 1].iter);
  }
  EXPECT_GT(halves, 0u);
  EXPECT_NE(r.out.find(".5,"), std::string::npos);

  const auto plain = dfpi_cmd({"solve", "--problem", "cd1d:n=40,pe=20", "--recruit", "aaos", "--no-halves"});
  EXPECT_EQ(plain.out.find(".5,"), std::string::npos);
}

TEST(CliSolve, OutputIsByteStable) {
  const std::vector<std::string> args{"solve", "--problem", "cd1d:n=50,pe=30,rhs=random", "--seed", "7",
                                      "--recruit", "rr", "--max-iter", "200"};
  const auto a = dfpi_cmd(args), b = dfpi_cmd(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.code, b.code);
  const auto f1 = scratch("stable1.csv"), f2 = scratch("stable2.csv");
  auto with_out = [&](const fs::path& f) {
    auto v = args;
    v.insert(v.end(), {"--out", f.string()});
    return dfpi_cmd(v);
  };
  with_out(f1);
  with_out(f2);
  EXPECT_EQ(read_file(f1), read_file(f2));
  EXPECT_EQ(read_file(f1), a.out);
}

TEST(CliSolve, SeedSelectsTheRandomRightHandSide) {
  const auto a = dfpi_cmd({"solve", "--problem", "cd1d:n=20,pe=5,rhs=random", "--seed", "1", "--max-iter", "3"});
  const auto b = dfpi_cmd({"solve", "--problem", "cd1d:n=20,pe=5,rhs=random", "--seed", "2", "--max-iter", "3"});
  EXPECT_NE(lines_of(a.out)[1], lines_of(b.out)[1]);
}

TEST(CliSolve, BreakdownExitsThree) {
  const auto m = write_file("bicg.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 1 1\n2 2 1\n");
  const auto rhs = write_file("e1.mtx", "%%MatrixMarket matrix array real general\n2 1\n1\n0\n");
  const auto r = dfpi_cmd({"solve", "--matrix", m, "--rhs", rhs, "--precond", "identity", "--solver", "bicg"});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_NE(r.err.find("breakdown"), std::string::npos);
}

TEST(CliSolve, BicgstabCountsHalfStepsByDefault) {
  const std::vector<std::string> base{"solve", "--problem", "laplace2d:nx=6,ny=6", "--precond", "identity",
                                      "--solver", "bicgstab"};
  const auto total = dfpi_cmd(base);
  auto v = base;
  v.insert(v.end(), {"--count", "reported"});
  const auto reported = dfpi_cmd(v);
  ASSERT_EQ(total.code, 0);
  ASSERT_EQ(reported.code, 0);
  const auto t = parse_trace(total.out), rp = parse_trace(reported.out);
  ASSERT_EQ(t.size(), rp.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t[i].iter, static_cast<double>(i));
    EXPECT_EQ(rp[i].iter, 0.5 * static_cast<double>(i));
    EXPECT_EQ(t[i].residual, rp[i].residual);
  }
}

TEST(CliSolve, DeflationRemovesTheDivergence) {
  const std::vector<std::string> base{"solve", "--problem", "prescribed:n=30,bad=3,q=0.6,rho=1.5,seed=3",
                                      "--precond", "identity", "--max-iter", "300"};
  EXPECT_NE(dfpi_cmd(base).code, 0);
  auto v = base;
  v.insert(v.end(), {"--deflate", "3"});
  const auto r = dfpi_cmd(v);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse_trace(r.out).back().trouble, 3u);
}

TEST(CliSolve, ConfigErrorsExitOne) {
  const std::vector<std::vector<std::string>> bad{
      {"solve", "--solver", "gmres", "--recruit", "rr"},
      {"solve", "--precond", "ilu1"},
      {"solve", "--solver", "sor"},
      {"solve", "--matrix", scratch("missing.mtx").string()},
      {"solve", "--matrix", identity_matrix(), "--problem", "cd1d:n=10"},
      {"solve", "--problem", "cd1d:n=10,bogus=1"},
      {"solve", "--solver", "cg"},  // cd1d is not symmetric
      {"solve", "--recruit", "bc-mw", "--window", "0"},
      {"solve", "--recruit", "aaos", "--deflate", "2"},
      {"solve", "--tol", "0"},
      {"solve", "--count", "some"},
      {"solve", "--matrix", identity_matrix(), "--rhs", write_file("short.mtx", "%%MatrixMarket matrix array real general\n2 1\n1\n1\n")},
      {"frobnicate"},
      {},
  };
  for (const auto& args : bad) {
    const auto r = dfpi_cmd(args);
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    EXPECT_EQ(r.code, 1) << joined << "\n" << r.err;
    EXPECT_FALSE(r.err.empty()) << joined;
  }
}

TEST(CliSolve, HelpExitsZero) {
  EXPECT_EQ(dfpi_cmd({"--help"}).code, 0);
  EXPECT_EQ(dfpi_cmd({"solve", "--help"}).code, 0);
}

std::map<std::string, std::vector<std::string>> table_rows(const fs::path& csv) {
  std::map<std::string, std::vector<std::string>> out;
  const auto ls = lines_of(read_file(csv));
  EXPECT_EQ(ls.at(0), "method,status,iterations,final_residual,peak_trouble_size,message");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = fields(ls[i]);
    out[f.at(0)] = f;
  }
  return out;
}

TEST(CliCompare, RrNeedsLessStorageThanBoostConv) {
  const auto csv = scratch("compare.csv");
  const auto r = dfpi_cmd({"compare", "--problem", "cd1d:n=100,pe=50", "--methods", "richardson,boostconv,rr",
                           "--max-iter", "3000", "--out", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = table_rows(csv);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.at("boostconv").at(1), "converged");
  EXPECT_EQ(rows.at("rr").at(1), "converged");
  EXPECT_LT(std::stoul(rows.at("rr").at(4)), std::stoul(rows.at("boostconv").at(4)));
  EXPECT_EQ(std::stoul(rows.at("richardson").at(4)), 0u);
  EXPECT_NE(r.out.find("peak_trouble"), std::string::npos);
}

// Projected residual x^(k+1/2) per step k; steps without a half-step use x^(k).
std::vector<double> projected(const std::vector<Row>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.iter == std::floor(r.iter))
      out.push_back(r.residual);
    else if (!out.empty())
      out.back() = r.residual;
  }
  return out;
}

// BoostConv's projected iterate minimizes the residual over all of x0 + K^k,
// where every other strategy's projected iterate lives.
TEST(CliCompare, BoostConvIsTheLowerEnvelopeOfProjectedResiduals) {
  const auto dir = scratch("traces");
  const auto r = dfpi_cmd({"compare", "--problem", "cd1d:n=100,pe=50", "--project", "lsq-a", "--methods",
                           "boostconv,bc-mw,aaos,tss,rr", "--trace-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bc = projected(parse_trace(read_file(dir / "boostconv.csv")));
  for (const char* other : {"bc-mw", "aaos", "tss", "rr"}) {
    const auto o = projected(parse_trace(read_file(dir / (std::string(other) + ".csv"))));
    for (std::size_t k = 0; k < std::min(bc.size(), o.size()); ++k)
      EXPECT_LE(bc[k], o[k] + 1e-8 * 10.0) << other << " k " << k;
  }
}

TEST(CliCompare, FailedRunsStayInTheTable) {
  const auto csv = scratch("errors.csv");
  const auto r = dfpi_cmd({"compare", "--problem", "cd1d:n=30,pe=10", "--methods", "cg,gmres", "--out", csv.string()});
  EXPECT_EQ(r.code, 0);
  const auto rows = table_rows(csv);
  EXPECT_EQ(rows.at("cg").at(1), "error");
  EXPECT_EQ(rows.at("gmres").at(1), "converged");
}

TEST(CliCompare, EmptyOrUnknownSuiteExitsOne) {
  EXPECT_EQ(dfpi_cmd({"compare", "--methods", ""}).code, 1);
  EXPECT_EQ(dfpi_cmd({"compare", "--methods", " , "}).code, 1);
  EXPECT_EQ(dfpi_cmd({"compare", "--methods", "boostconv,simplex"}).code, 1);
}

TEST(CliVerify, SmokeScalePasses) {
  const auto r = dfpi_cmd({"verify", "--scale", "2"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("n = 4"), std::string::npos);
  for (int k = 1; k <= 8; ++k) EXPECT_NE(r.out.find("criterion " + std::to_string(k) + " "), std::string::npos);
}

TEST(CliVerify, DefaultSizePasses) {
  const auto r = dfpi_cmd({"verify"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(CliVerify, CorruptedToleranceFails) {
  const auto r = dfpi_cmd({"verify", "--scale", "2", "--tolerance-scale", "0"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("failed check: criterion"), std::string::npos);
}

TEST(CliVerify, ScaleAndNAreExclusive) {
  EXPECT_EQ(dfpi_cmd({"verify", "--scale", "2", "--n", "4"}).code, 1);
}

}  // namespace
}  // namespace dfpi
