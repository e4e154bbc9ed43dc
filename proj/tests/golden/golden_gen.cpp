// Regenerates the committed derived-example fixtures. Every value is
// produced by the case's stated oracle; the acceptance suite checks the
// implementation against the committed file.
//
//   golden_gen [output.csv]

#include "derived_cases.hpp"
#include "streamgp/csv.hpp"

#include <cstdio>
#include <fstream>

int main(int argc, char** argv) {
  const std::string out_path =
      argc > 1 ? argv[1] : "tests/golden/derived_fixtures.csv";

  const auto cases =
      streamgp::golden::evaluate_derived_cases(streamgp::golden::Mode::Generate);

  std::ofstream out(out_path);
  if (!out) {
    std::fprintf(stderr, "cannot open %s for writing\n", out_path.c_str());
    return 1;
  }
  out << "name,value,tolerance\n";
  for (const auto& c : cases) {
    if (!std::isfinite(c.oracle)) {
      std::fprintf(stderr, "oracle for %s is not finite\n", c.name.c_str());
      return 1;
    }
    out << c.name << ',' << streamgp::format_double(c.oracle) << ','
        << streamgp::format_double(c.tol) << "\n";
  }
  std::printf("wrote %zu fixtures to %s\n", cases.size(), out_path.c_str());
  return 0;
}
