#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "io.hpp"
#include "problem.hpp"
#include "problem_gen.hpp"
#include "solvers.hpp"
#include "spectral.hpp"

namespace pnpd::bench {

namespace fs = std::filesystem;

using Manifest = std::map<std::string, std::string>;

inline std::string write_manifest(const Manifest& m) {
  std::string out;
  for (const auto& [k, v] : m) out += k + "=" + v + "\n";
  return out;
}

inline Manifest read_manifest(std::string_view text) {
  Manifest m;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw format_error("manifest: expected key=value, got '" + std::string(line) + "'");
    m[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  return m;
}

inline const std::string& manifest_get(const Manifest& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw format_error("manifest: missing key '" + key + "'");
  return it->second;
}

inline std::string read_text(const fs::path& p) {
  const Bytes b = read_file(p.string());
  return std::string(b.begin(), b.end());
}

/// "phantom", "phantom:N" or a PGM path.
inline Image load_source_image(const std::string& spec) {
  if (spec == "phantom") return phantom();
  if (spec.rfind("phantom:", 0) == 0) return phantom(parse_uint(std::string_view(spec).substr(8)));
  return read_pgm(read_file(spec));
}

struct GenOptions {
  std::string image = "phantom";
  std::string psf = "gaussian:sigma=2:support=21";
  std::string noise = "level=0.01,seed=0";
};

/*
 * Writes ground_truth.pgm (16-bit), psf.raw, b_delta.raw, noise.raw and
 * problem.txt into `out`. The ground truth is quantized through the PGM
 * before blurring, so every later run sees exactly the stored image.
 */
inline Manifest cmd_gen(const GenOptions& opt, const fs::path& out) {
  const PsfSpec psf_spec = parse_psf_spec(opt.psf);
  const NoiseSpec noise_spec = parse_noise_spec(opt.noise);
  const Bytes truth_pgm = write_pgm(load_source_image(opt.image), 65535);
  const Image x_true = read_pgm(truth_pgm);
  const Image psf = gen_psf(psf_spec);
  const Spectrum spec = psf_to_spectrum(psf, x_true.height(), x_true.width());
  const Image b = conv_apply(spec, x_true);
  const NoisyData noisy = add_noise(b, noise_spec);

  fs::create_directories(out);
  write_file((out / "ground_truth.pgm").string(), truth_pgm);
  write_file((out / "psf.raw").string(), write_raw(psf));
  write_file((out / "b_delta.raw").string(), write_raw(noisy.b_delta));
  write_file((out / "noise.raw").string(), write_raw(noisy.eta));

  Manifest m;
  m["source"] = opt.image;
  m["height"] = std::to_string(x_true.height());
  m["width"] = std::to_string(x_true.width());
  m["ground_truth"] = "ground_truth.pgm";
  m["psf"] = "psf.raw";
  m["psf_spec"] = format_psf_spec(psf_spec);
  m["psf_center"] = std::to_string(psf.height() / 2) + "," + std::to_string(psf.width() / 2);
  m["motion_raster"] = "bilinear";
  m["b_delta"] = "b_delta.raw";
  m["noise"] = "noise.raw";
  m["noise_level"] = format_double(noise_spec.level);
  m["noise_seed"] = std::to_string(noise_spec.seed);
  m["noise_rng"] = "mt19937_64+normal_distribution";
  m["delta"] = format_double(noisy.delta);
  m["boundary"] = "periodic";
  write_file((out / "problem.txt").string(), write_manifest(m));
  return m;
}

/// Rebuilds the problem from a gen directory. b_delta is the stored dump;
/// ground truth is attached when present.
inline Problem load_problem(const fs::path& dir, const Regularizer& reg) {
  const Manifest m = read_manifest(read_text(dir / "problem.txt"));
  const Image psf = read_raw(read_file((dir / manifest_get(m, "psf")).string()));
  const Image b_delta = read_raw(read_file((dir / manifest_get(m, "b_delta")).string()));
  std::optional<Image> truth;
  if (auto it = m.find("ground_truth"); it != m.end()) truth = read_pgm(read_file((dir / it->second).string()));
  Spectrum spec = psf_to_spectrum(psf, b_delta.height(), b_delta.width());
  return Problem(std::move(spec), b_delta, reg, std::move(truth));
}

inline RunResult cmd_run(const fs::path& problem_dir, const fs::path& config_path, const fs::path& out) {
  const RunConfig rc = parse_config(read_text(config_path));
  const Problem pb = load_problem(problem_dir, rc.reg);
  RunResult res = run_solver(pb, rc.solver);
  fs::create_directories(out);
  write_file((out / "reconstruction.pgm").string(), write_pgm(res.u_final, 65535));
  write_file((out / "reconstruction.raw").string(), write_raw(res.u_final));
  write_file((out / "trace.csv").string(), write_trace_csv(res.trace));
  return res;
}

/// Wide CSV keyed on iteration: iteration, then elapsed_s/objective/rre/ssim
/// per solver. Missing iterations are left empty.
inline std::string merge_traces(const std::vector<std::string>& names, const std::vector<Trace>& traces) {
  detail::require(names.size() == traces.size(), "merge_traces: names and traces differ in count");
  std::set<std::size_t> iterations;
  std::vector<std::map<std::size_t, const MetricsRow*>> index(traces.size());
  for (std::size_t s = 0; s < traces.size(); ++s)
    for (const auto& r : traces[s]) {
      iterations.insert(r.iteration);
      index[s][r.iteration] = &r;
    }
  std::string out = "iteration";
  for (const auto& n : names) out += "," + n + "_elapsed_s," + n + "_objective," + n + "_rre," + n + "_ssim";
  out += "\n";
  for (std::size_t it : iterations) {
    out += std::to_string(it);
    for (std::size_t s = 0; s < traces.size(); ++s) {
      auto f = index[s].find(it);
      if (f == index[s].end()) {
        out += ",,,,";
        continue;
      }
      // reuse the trace row format minus its iteration column
      const std::string row = trace_csv_row(*f->second);
      out += row.substr(row.find(','));
    }
    out += "\n";
  }
  return out;
}

/// Runs every config on the same problem, writing <name>/trace.csv,
/// <name>/reconstruction.pgm and merged.csv. Names come from config stems.
inline std::vector<std::string> cmd_compare(const fs::path& problem_dir, const std::vector<fs::path>& configs,
                                            const fs::path& out) {
  detail::require(configs.size() >= 2, "compare: needs at least two configs");
  std::vector<std::string> names;
  std::vector<Trace> traces;
  for (const auto& cfg : configs) {
    std::string name = cfg.stem().string();
    for (int k = 2; std::find(names.begin(), names.end(), name) != names.end(); ++k)
      name = cfg.stem().string() + "_" + std::to_string(k);
    const RunResult res = cmd_run(problem_dir, cfg, out / name);
    names.push_back(name);
    traces.push_back(res.trace);
  }
  write_file((out / "merged.csv").string(), merge_traces(names, traces));
  return names;
}

}  // namespace pnpd::bench
