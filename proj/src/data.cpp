#include "odegrow/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

#include "odegrow/models.hpp"

namespace odegrow {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_number(std::string_view text, std::size_t line, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<Lesion> read_cohort(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  std::string_view header = trim(line);
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  if (header != kCohortHeader) {
    throw ParseError(1, "expected header '" + std::string(kCohortHeader) + "'");
  }

  struct Rows {
    std::vector<std::pair<double, double>> points;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Rows> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(line_no, "empty patient_id");
    const double t = parse_number(fields[1], line_no, "time_days");
    const double v = parse_number(fields[2], line_no, "volume");
    std::string id(fields[0]);
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.points.emplace_back(t, v);
  }

  std::vector<Lesion> cohort;
  cohort.reserve(order.size());
  for (const auto& id : order) {
    auto& pts = rows[id].points;
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> times;
    std::vector<double> volumes;
    for (const auto& [t, v] : pts) {
      times.push_back(t);
      volumes.push_back(v);
    }
    cohort.push_back(Lesion::validate(id, std::move(times), std::move(volumes)));
  }
  return cohort;
}

std::vector<Lesion> load_cohort(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return read_cohort(in);
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_cohort(std::ostream& out, const std::vector<Lesion>& cohort) {
  out << kCohortHeader << '\n';
  for (const auto& lesion : cohort) {
    for (std::size_t i = 0; i < lesion.size(); ++i) {
      out << lesion.id() << ',' << format_number(lesion.times()[i]) << ',' << format_number(lesion.volumes()[i])
          << '\n';
    }
  }
}

void save_cohort(const std::filesystem::path& path, const std::vector<Lesion>& cohort) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  write_cohort(out, cohort);
}

void write_truth(std::ostream& out, const std::vector<TruthRow>& truth) {
  out << kTruthHeader << '\n';
  for (const auto& row : truth) out << row.patient_id << ',' << row.param_name << ',' << format_number(row.value) << '\n';
}

void save_truth(const std::filesystem::path& path, const std::vector<TruthRow>& truth) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  write_truth(out, truth);
}

ParamRange default_param_range(ModelKind kind, const std::string& name) {
  if (name == "v0") return {0.5, 4.0};
  if (name == "v_inf") return is_neural(kind) ? ParamRange{0.5, 4.0} : ParamRange{0.25, 6.0};
  if (name == "omega") return kind == ModelKind::Exponential ? ParamRange{-0.004, 0.006} : ParamRange{0.004, 0.015};
  if (name == "lambda") return {-1.0, 1.0};
  if (name == "gamma") return {-0.5, 0.5};
  // Neural weights: input layer is dimensionless, the output layer is a rate per day.
  if (name == "w_hidden") return {-1.0, 1.0};
  if (name == "w_output") return {-0.01, 0.01};
  throw Error(ErrorCode::InvalidConfig, "no parameter named '" + name + "'");
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (n_lesions < 1) fail("n_lesions must be at least 1");
  if (min_points < 6) fail("points per lesion must be at least 6");
  if (min_points > max_points) fail("min_points exceeds max_points");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise must be a non-negative number");
  if (!(span_days.low >= 1.0) || span_days.low > span_days.high) fail("span_days must be a non-empty range >= 1");
  if (span_days.low < static_cast<double>(max_points)) fail("span_days too short for distinct measurement days");
  for (const auto& [name, range] : param_ranges) {
    if (!(range.low <= range.high) || !std::isfinite(range.low) || !std::isfinite(range.high)) {
      fail("invalid sampling range for '" + name + "'");
    }
    (void)default_param_range(generator_kind, name);
  }
  const auto positive = [&](const char* name) {
    auto it = param_ranges.find(name);
    const ParamRange r = it != param_ranges.end() ? it->second : default_param_range(generator_kind, name);
    if (!(r.low > 0.0)) fail(std::string(name) + " must be sampled from positive values");
  };
  positive("v0");
  if (generator_kind != ModelKind::Exponential) positive("v_inf");
}

SyntheticCohort generate_cohort(const SynthConfig& config) {
  config.validate();
  const ModelSpec spec = ModelSpec::of(config.generator_kind);
  std::mt19937_64 rng(config.seed);
  auto range = [&](const std::string& name) {
    auto it = config.param_ranges.find(name);
    return it != config.param_ranges.end() ? it->second : default_param_range(config.generator_kind, name);
  };
  auto draw = [&](const ParamRange& r) {
    if (r.low == r.high) return r.low;
    return std::uniform_real_distribution<double>(r.low, r.high)(rng);
  };

  SyntheticCohort out;
  for (std::size_t l = 0; l < config.n_lesions; ++l) {
    const std::string id = "L" + std::string(4 - std::min<std::size_t>(4, std::to_string(l + 1).size()), '0') +
                           std::to_string(l + 1);
    const auto n_points = std::uniform_int_distribution<std::size_t>(config.min_points, config.max_points)(rng);
    const auto span = static_cast<long>(std::llround(draw(config.span_days)));
    std::set<long> days{0};
    std::uniform_int_distribution<long> day(1, span);
    while (days.size() < n_points) days.insert(day(rng));
    const std::vector<double> times(days.begin(), days.end());

    std::vector<double> values;
    std::optional<std::vector<double>> volumes;
    for (int attempt = 0; attempt < 1000 && !volumes; ++attempt) {
      values.clear();
      for (const auto& name : spec.parameter_names()) {
        if (name.rfind("w[", 0) == 0) continue;
        values.push_back(draw(range(name)));
      }
      if (const auto& shape = spec.mlp_shape()) {
        const std::size_t hidden_block = shape->hidden * shape->inputs + shape->hidden;
        for (std::size_t i = 0; i < shape->parameter_count(); ++i) {
          values.push_back(draw(range(i < hidden_block ? "w_hidden" : "w_output")));
        }
      }
      volumes = try_predict(spec, values, times);
    }
    if (!volumes) throw Error(ErrorCode::InvalidConfig, "parameter ranges never produce a finite trajectory");

    if (config.noise_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, config.noise_sigma);
      for (double& v : *volumes) v *= std::exp(noise(rng));
    }
    const auto names = spec.parameter_names();
    for (std::size_t i = 0; i < names.size(); ++i) out.truth.push_back({id, names[i], values[i]});
    out.lesions.push_back(Lesion::validate(id, times, std::move(*volumes)));
  }
  return out;
}

}  // namespace odegrow
