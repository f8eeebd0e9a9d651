#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "zkqbf/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Zero-knowledge checking of QBF certificates"};
  std::string role = "prover", mode = "qres", backend = "itmac";
  zkq::SessionConfig cfg;
  app.add_option("--role", role, "prover or verifier")->check(CLI::IsMember({"prover", "verifier"}));
  app.add_option("--mode", mode, "qres, cube, herbrand or skolem")
      ->check(CLI::IsMember({"qres", "cube", "herbrand", "skolem"}));
  app.add_option("--backend", backend, "cleartext or itmac")->check(CLI::IsMember({"cleartext", "itmac"}));
  app.add_option("--field-bits", cfg.fieldBits, "extension degree k of GF(2^k)");
  app.add_option("--bucket-size", cfg.bucketSize, "clauses per width bucket (0 = one bucket)");
  app.add_option("--listen", cfg.listen, "host:port to accept one connection on");
  app.add_option("--connect", cfg.connect, "host:port of the peer");
  app.add_flag("--in-process", cfg.inProcess, "run both parties in this process");
  app.add_option("--qbf", cfg.qbfPath, "public QDIMACS instance");
  app.add_option("--cert", cfg.certPath, "private certificate (prover only)");
  app.add_option("--stats-out", cfg.statsPath, "write key=value statistics here");
  app.add_option("--seed", cfg.seed, "dealer and coin seed (testing)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : zkq::kExitConfig;
  }
  cfg.role = role == "prover" ? zkq::Role::Prover : zkq::Role::Verifier;
  cfg.mode = *zkq::parseMode(mode);
  cfg.backend = *zkq::parseBackend(backend);

  zkq::StatsReport report;
  try {
    report = zkq::runSession(cfg);
  } catch (const zkq::ConfigError& e) {
    std::cerr << "zkqbf: " << e.what() << '\n';
    return zkq::kExitConfig;
  }
  auto text = zkq::formatStats(report);
  if (!cfg.statsPath.empty()) {
    std::ofstream out(cfg.statsPath);
    if (!out) {
      std::cerr << "zkqbf: cannot write " << cfg.statsPath << '\n';
      return zkq::kExitConfig;
    }
    out << text;
  }
  const char* verdict = report.exitCode == zkq::kExitAccept   ? "accept"
                        : report.exitCode == zkq::kExitReject ? "reject"
                                                              : "abort";
  std::cout << report.role << ": " << verdict;
  if (!report.accept && !report.stage.empty()) std::cout << " (stage " << report.stage << ")";
  if (!report.error.empty()) std::cout << ": " << report.error;
  std::cout << '\n';
  return report.exitCode;
}
