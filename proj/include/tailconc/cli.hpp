#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "tailconc/loss_models.hpp"

namespace tailconc {

/// Parses {"kind": "pareto"|"burr"|"gandh"|"hall", ...}. Throws ParseError for
/// malformed text or unknown keys, DomainError for invalid parameters.
LossModel parse_model_spec(const std::string& text);

enum class OutputFormat { Csv, Json };

struct RunSpec {
  std::string command;
  std::string model_text;
  std::optional<LossModel> model;
  int n = 2;
  double alpha_min = 0.95;
  double alpha_max = 0.9997;
  int points = 40;
  std::uint64_t samples = 10'000'000;
  std::uint32_t batches = 20;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  bool oracle = false;
  bool exact_denominator = false;
  bool hall_closed_form = false;
  OutputFormat format = OutputFormat::Csv;
  std::string out;
};

int run_info(const RunSpec& spec, std::ostream& out, std::ostream& err);
int run_curve(const RunSpec& spec, std::ostream& out, std::ostream& err);
int run_crossover(const RunSpec& spec, std::ostream& out, std::ostream& err);
int run_diag(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Full command line entry point; returns the process exit code
/// (0 ok, 1 usage/parse, 2 domain, 3 numeric precision).
int cli_main(int argc, char** argv);

}  // namespace tailconc
