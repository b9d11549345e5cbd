// Wall-time comparison of the serial reference ensemble loop against the
// OpenMP one, plus a bitwise equality check of their outputs.

#include <chrono>
#include <cstdio>
#include <string>

#include "um/config.hpp"
#include "um/simulation.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string preset = argc > 1 ? argv[1] : "multinomial-k4";
  um::ExperimentConfig cfg = um::make_preset(preset);
  cfg.horizon = 20000;
  cfg.runs = 8;

  auto t0 = std::chrono::steady_clock::now();
  const um::EnsembleResult serial = um::run_ensemble(cfg, um::Execution::serial);
  const double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const um::EnsembleResult parallel = um::run_ensemble(cfg, um::Execution::parallel);
  const double t_parallel = seconds_since(t0);

  bool identical = serial.runs.size() == parallel.runs.size();
  for (std::size_t r = 0; identical && r < serial.runs.size(); ++r) {
    for (std::size_t c = 0; identical && c < serial.runs[r].log_beliefs.size(); ++c) {
      identical = serial.runs[r].log_beliefs[c] == parallel.runs[r].log_beliefs[c];
    }
  }

  std::printf("%s: %d runs, horizon %lld\n", preset.c_str(), cfg.runs,
              static_cast<long long>(cfg.horizon));
  std::printf("  serial    %.3f s\n", t_serial);
  std::printf("  parallel  %.3f s  (speedup %.2fx)\n", t_parallel, t_serial / t_parallel);
  std::printf("  outputs bitwise identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
