#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "damperopt/error.hpp"
#include "damperopt/modal_models.hpp"
#include "damperopt/position_opt.hpp"
#include "damperopt/trace_formula.hpp"
#include "damperopt/verification.hpp"

namespace damperopt {

enum ExitCode : int {
  ExitOk = 0,
  ExitConfig = 1,
  ExitNoAdmissible = 2,
  ExitVerification = 3,
};

struct RunConfig {
  std::string model = "chain";  // chain | string | rod
  std::size_t n = 600;
  Criterion criterion = Criterion::Energy;
  std::size_t band_offset = 0;
  std::size_t band_count = 0;  // 0: every mode above the offset
  double a0 = 1.0;
  double k0 = 1.0;
  std::size_t grid = 0;        // spectral sweep positions; 0: one per mode
  std::vector<std::size_t> n_list;
  std::string out;             // empty: standard output
  std::size_t threads = 0;     // 0: hardware concurrency
  bool full_scale = false;
  int table = 0;               // 0: every table
  double p = 0.495;
  int exponent = 0;            // 0: 1 for energy, 3 for displacement
  bool s_table = false;

  std::size_t effective_count() const { return band_count == 0 ? n - std::min(band_offset, n) : band_count; }
};

namespace detail {

inline std::string normalise_key(std::string_view key) {
  std::string k(key);
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw Error(ErrorCode::Config, "bad value '" + value + "' for " + key);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw Error(ErrorCode::Config, "bad boolean '" + value + "' for " + key);
}

inline std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<std::size_t>(key, item));
  }
  if (out.empty()) throw Error(ErrorCode::Config, "empty list for " + key);
  return out;
}

}  // namespace detail

/// Applies one key=value setting. Keys accept '-' or '_' as separator.
inline void apply_setting(RunConfig& cfg, std::string_view raw_key, const std::string& value) {
  const std::string key = detail::normalise_key(raw_key);
  using detail::parse_number;
  if (key == "model") {
    if (value != "chain" && value != "string" && value != "rod") {
      throw Error(ErrorCode::Config, "unknown model '" + value + "'");
    }
    cfg.model = value;
  } else if (key == "n") {
    cfg.n = parse_number<std::size_t>(key, value);
  } else if (key == "criterion") {
    if (value == "energy") cfg.criterion = Criterion::Energy;
    else if (value == "displacement") cfg.criterion = Criterion::Displacement;
    else throw Error(ErrorCode::Config, "unknown criterion '" + value + "'");
  } else if (key == "band_offset") {
    cfg.band_offset = parse_number<std::size_t>(key, value);
  } else if (key == "band_count") {
    cfg.band_count = parse_number<std::size_t>(key, value);
  } else if (key == "a0") {
    cfg.a0 = parse_number<double>(key, value);
  } else if (key == "k0") {
    cfg.k0 = parse_number<double>(key, value);
  } else if (key == "grid") {
    cfg.grid = parse_number<std::size_t>(key, value);
  } else if (key == "n_list") {
    cfg.n_list = detail::parse_list(key, value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "threads") {
    cfg.threads = parse_number<std::size_t>(key, value);
    if (cfg.threads == 0) throw Error(ErrorCode::Config, "threads must be at least 1");
  } else if (key == "full_scale") {
    cfg.full_scale = detail::parse_bool(key, value);
  } else if (key == "table") {
    cfg.table = parse_number<int>(key, value);
  } else if (key == "p") {
    cfg.p = parse_number<double>(key, value);
  } else if (key == "exponent") {
    cfg.exponent = parse_number<int>(key, value);
  } else if (key == "s_table") {
    cfg.s_table = detail::parse_bool(key, value);
  } else {
    throw Error(ErrorCode::Config, "unknown key '" + std::string(raw_key) + "'");
  }
}

/// Flat key=value lines; blank lines and '#' comments are skipped.
inline void apply_config_stream(RunConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key=value");
    }
    apply_setting(cfg, detail::trim(std::string_view(line).substr(0, eq)),
                  detail::trim(std::string_view(line).substr(eq + 1)));
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config file " + path);
  apply_config_stream(cfg, in);
}

inline ModalModel build_model(const RunConfig& cfg, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::Config, "n must be at least 1");
  if (cfg.model == "chain") return chain_model(n);
  if (cfg.model == "string") return string_model(n);
  return rod_model(n, cfg.a0, cfg.k0);
}

/// Fixed-format number for CSV output; non-finite values print as "inf".
inline std::string format_g(double x, int digits) {
  if (!std::isfinite(x)) return x < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline constexpr std::string_view sweep_csv_header = "n,k,p,v_opt,trace_opt,admissible";

inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep, bool header = true) {
  if (header) os << sweep_csv_header << '\n';
  for (const auto& r : sweep.rows) {
    os << sweep.n << ',' << r.k << ',' << format_g(r.p, 6) << ',' << format_g(r.v_opt, 12) << ','
       << format_g(r.trace_opt, 12) << ',' << (r.admissible ? 1 : 0) << '\n';
  }
}

/// Where results go: the CSV to `out` (or a file when configured), the
/// human-readable summary to `log`.
struct Streams {
  std::ostream& out;
  std::ostream& log;
};

namespace detail {

/// Buffers CSV text and writes it once, to the configured file or to the
/// output stream. Summary lines go to stdout when the CSV went to a file.
class CsvSink {
 public:
  CsvSink(const RunConfig& cfg, Streams io) : cfg_(cfg), io_(io) {}

  std::ostream& csv() { return buffer_; }
  std::ostream& summary() { return cfg_.out.empty() ? io_.log : io_.out; }

  void flush() {
    if (cfg_.out.empty()) {
      io_.out << buffer_.str();
      io_.out.flush();
      return;
    }
    std::ofstream f(cfg_.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::Config, "cannot write " + cfg_.out);
    f << buffer_.str();
  }

 private:
  const RunConfig& cfg_;
  Streams io_;
  std::ostringstream buffer_;
};

inline SpectralWeights weights_for(const RunConfig& cfg, const ModalModel& model) {
  if (cfg.band_offset >= model.n()) {
    throw Error(ErrorCode::Config, "band offset " + std::to_string(cfg.band_offset) + " leaves no mode in dimension " +
                                       std::to_string(model.n()));
  }
  RunConfig c = cfg;
  c.n = model.n();
  try {
    return make_weights(cfg.criterion, cfg.band_offset, c.effective_count(), model);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

inline int run_guarded(Streams io, auto&& body) {
  try {
    return body();
  } catch (const Error& e) {
    io.log << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::NoAdmissiblePosition) return ExitNoAdmissible;
    return ExitConfig;
  } catch (const std::exception& e) {
    io.log << "error: " << e.what() << '\n';
    return ExitConfig;
  }
}

inline std::string describe_best(const BestPosition& best) {
  std::ostringstream os;
  os << "best k=" << best.design.position_index << " p=" << format_g(best.design.position_p, 6)
     << " v_opt=" << format_g(best.design.v_opt, 12) << " trace_opt=" << format_g(best.design.trace_opt, 12);
  if (best.partner) {
    os << " partner k=" << best.partner->k << " p=" << format_g(best.partner->p, 6);
  } else {
    os << " partner none";
  }
  return os.str();
}

}  // namespace detail

inline int cmd_sweep(const RunConfig& cfg, Streams io) {
  return detail::run_guarded(io, [&] {
    const auto model = build_model(cfg, cfg.n);
    const auto weights = detail::weights_for(cfg, model);
    const auto sweep = sweep_positions(model, weights, {cfg.threads, cfg.grid});

    detail::CsvSink sink(cfg, io);
    write_sweep_csv(sink.csv(), sweep);
    sink.flush();

    auto& log = sink.summary();
    log << sweep.model << ' ' << sweep.weights << ": ";
    try {
      log << detail::describe_best(best_position(sweep)) << '\n';
    } catch (const Error& e) {
      log << "no admissible position\n";
      throw;
    }
    return static_cast<int>(ExitOk);
  });
}

struct TableBand {
  Criterion criterion;
  std::size_t offset;
  std::size_t count;
};

/// Bands and criteria behind each reproducible table.
inline std::vector<TableBand> table_bands(int id) {
  const auto both = [](std::vector<std::pair<std::size_t, std::size_t>> ranges) {
    std::vector<TableBand> out;
    for (auto [first, last] : ranges) {
      out.push_back({Criterion::Energy, first - 1, last - first + 1});
      out.push_back({Criterion::Displacement, first - 1, last - first + 1});
    }
    return out;
  };
  switch (id) {
    case 1: return {{Criterion::Energy, 0, 100}};
    case 2: return {{Criterion::Energy, 100, 100}};
    case 3: return {{Criterion::Displacement, 0, 100}};
    case 4: return {{Criterion::Displacement, 100, 100}};
    case 5: return both({{1, 20}, {1, 50}, {1, 100}, {101, 120}, {101, 150}, {201, 220}});
    case 6: return both({{1, 5}, {1, 10}, {11, 15}, {11, 20}, {31, 35}, {31, 40}});
    default: throw Error(ErrorCode::Config, "table id must be 1..6");
  }
}

inline std::vector<std::size_t> table_dimensions(int id, const RunConfig& cfg) {
  if (!cfg.n_list.empty()) return cfg.n_list;
  if (id <= 4) {
    if (cfg.full_scale) return {2000, 4000, 6000, 8000, 10000};
    return {2000};
  }
  if (cfg.full_scale) return {600, 2000, 10000};
  return {600, 2000};
}

inline constexpr std::string_view tables_csv_header = "table,n,criterion,band_first,band_last,k,p,v_opt,trace_opt,partner_k";

inline int cmd_tables(const RunConfig& cfg, Streams io) {
  return detail::run_guarded(io, [&] {
    std::vector<int> ids;
    if (cfg.table == 0) {
      ids = {1, 2, 3, 4, 5, 6};
    } else {
      (void)table_bands(cfg.table);
      ids = {cfg.table};
    }
    detail::CsvSink sink(cfg, io);
    sink.csv() << tables_csv_header << '\n';
    std::vector<std::string> summary;
    for (int id : ids) {
      for (std::size_t n : table_dimensions(id, cfg)) {
        const auto model = chain_model(n);
        for (const auto& band : table_bands(id)) {
          SpectralWeights weights;
          try {
            weights = make_weights(band.criterion, band.offset, band.count, model);
          } catch (const Error& e) {
            throw Error(ErrorCode::Config, "table " + std::to_string(id) + ": " + e.what());
          }
          const auto best = best_position(sweep_positions(model, weights, {cfg.threads, 0}));
          sink.csv() << id << ',' << n << ',' << to_string(band.criterion) << ',' << band.offset + 1 << ','
                     << band.offset + band.count << ',' << best.design.position_index << ','
                     << format_g(best.design.position_p, 6) << ',' << format_g(best.design.v_opt, 12) << ','
                     << format_g(best.design.trace_opt, 12) << ',';
          if (best.partner) sink.csv() << best.partner->k;
          sink.csv() << '\n';
          summary.push_back("table " + std::to_string(id) + " n=" + std::to_string(n) + " " + weights.describe() +
                            ": " + detail::describe_best(best));
        }
      }
    }
    sink.flush();
    for (const auto& line : summary) sink.summary() << line << '\n';
    return static_cast<int>(ExitOk);
  });
}

inline int cmd_verify(const RunConfig& cfg, Streams io) {
  (void)cfg;
  bool ok = true;
  const std::vector<SuiteResult (*)()> suites = {
      [] { return verify_oracle_equivalence(); }, [] { return verify_duality(); },
      [] { return verify_definiteness(); },       [] { return verify_time_integral(); },
      [] { return verify_one_dof(); },            [] { return verify_expected_degenerate(); },
  };
  const std::vector<std::string> names = {"oracle_equivalence",   "duality", "hatX_positive_definite",
                                          "time_domain_integral", "one_dof", "expected_degenerate"};
  for (std::size_t i = 0; i < suites.size(); ++i) {
    SuiteResult r;
    try {
      r = suites[i]();
    } catch (const std::exception& e) {
      r.name = names[i];
      r.passed = false;
      r.note = e.what();
    }
    ok = ok && r.passed;
    io.out << (r.passed ? "PASS " : "FAIL ") << r.name << " checks=" << r.checks
           << " worst=" << format_g(r.worst, 3);
    if (!r.note.empty()) io.out << " note=" << r.note;
    io.out << '\n';
  }
  io.out << (ok ? "PASS all\n" : "FAIL some suites\n");
  return ok ? ExitOk : ExitVerification;
}

inline void write_s_table(std::ostream& os) {
  os << "k,S,T\n";
  for (std::size_t k : {1, 2, 3, 4, 10, 100}) {
    os << k << ',' << format_g(S_of_k(k), 9) << ',' << format_g(T_of_k(k), 9) << '\n';
  }
}

inline int cmd_asymptotics(const RunConfig& cfg, Streams io) {
  return detail::run_guarded(io, [&] {
    if (cfg.model != "chain") throw Error(ErrorCode::Config, "asymptotics are defined for the chain model");
    if (cfg.n_list.empty() && cfg.s_table) {
      detail::CsvSink sink(cfg, io);
      write_s_table(sink.csv());
      sink.flush();
      return static_cast<int>(ExitOk);
    }
    if (cfg.n_list.size() < 3) throw Error(ErrorCode::Config, "n-list needs at least 3 entries");
    if (!std::is_sorted(cfg.n_list.begin(), cfg.n_list.end()) ||
        std::adjacent_find(cfg.n_list.begin(), cfg.n_list.end()) != cfg.n_list.end()) {
      throw Error(ErrorCode::Config, "n-list must be strictly ascending");
    }
    if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw Error(ErrorCode::Config, "p must lie in (0, 1)");
    const std::size_t s = cfg.band_count == 0 ? std::min<std::size_t>(100, cfg.n_list.front()) : cfg.band_count;
    if (cfg.band_offset + s > cfg.n_list.front()) throw Error(ErrorCode::Config, "band exceeds the smallest n");
    const int e = cfg.exponent != 0 ? cfg.exponent : (cfg.criterion == Criterion::Energy ? 1 : 3);

    const auto fit = scaling_fit(cfg.criterion, cfg.band_offset, s, cfg.p, cfg.n_list, e);

    detail::CsvSink sink(cfg, io);
    sink.csv() << "n,k,substituted,trace_opt,ratio\n";
    for (const auto& r : fit.rows) {
      sink.csv() << r.n << ',' << r.index << ',' << (r.substituted ? 1 : 0) << ','
                 << (r.excluded ? "excluded" : format_g(r.trace_opt, 12)) << ','
                 << (r.excluded ? "excluded" : format_g(r.ratio, 12)) << '\n';
    }
    if (cfg.s_table) {
      sink.csv() << '\n';
      write_s_table(sink.csv());
    }
    sink.flush();

    auto& log = sink.summary();
    log << to_string(cfg.criterion) << " p=" << format_g(cfg.p, 6) << " band " << cfg.band_offset + 1 << '-'
        << cfg.band_offset + s << " exponent=" << e << '\n';
    log << "spread_largest_half=" << format_g(fit.max_rel_spread, 6) << " spread_all=" << format_g(fit.spread_all, 6)
        << " drift=" << format_g(fit.drift, 6) << '\n';
    if (cfg.band_offset == 0) {
      log << "alpha1=" << format_g(alpha1(cfg.p, s), 9) << " b1_limit=" << format_g(b1_limit(cfg.p, s), 9)
          << " b2_bound=" << s << " b3_bound=" << format_g(b3_bound(cfg.p, s), 9) << '\n';
      const auto d = displacement_limits(cfg.p, s);
      log << "aK_limit=" << format_g(d.aK_limit, 9) << " bK1_limit=" << format_g(d.bK1_limit, 9)
          << " bK2_bound=" << format_g(d.bK2_bound, 9) << " bK3_bound=" << format_g(d.bK3_bound, 9) << '\n';
    }
    return static_cast<int>(ExitOk);
  });
}

}  // namespace damperopt
