#include "bayescal/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bayescal/error.hpp"

namespace bayescal::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": " + std::strerror(errno));
  return in;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("NA");
}

std::optional<double> parse_optional(const std::string& text, const std::string& where) {
  if (text == "NA") return std::nullopt;
  double v;
  if (!parse_double(text, v)) throw ParseError(where + ": malformed number '" + text + "'");
  return v;
}

double parse_required(const TextBlock& b, const std::string& key, const std::string& where) {
  const std::string* v = b.get(key);
  if (!v) throw ParseError(where + ": missing '" + key + "'");
  double out;
  if (!parse_double(*v, out)) throw ParseError(where + ": malformed number for '" + key + "': '" + *v + "'");
  return out;
}

}  // namespace

std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ------------------------------------------------------------ measurements

Dataset read_measurements(std::istream& in, const std::string& source, std::optional<Dims> expected) {
  std::string line;
  if (!read_line(in, line)) throw ParseError(source + ": empty file (expected a header row)");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (col.count(header[i])) throw ParseError(source + ":1: duplicate column '" + header[i] + "'");
    col[header[i]] = i;
  }
  for (const char* req : {"ax", "ay"})
    if (!col.count(req)) throw ParseError(source + ":1: missing required column '" + std::string(req) + "'");
  const bool has_az = col.count("az") > 0;
  Dims dims = has_az ? Dims::three : Dims::two;
  if (expected) {
    if (*expected == Dims::three && !has_az)
      throw ParseError(source + ":1: missing required column 'az'");
    if (*expected == Dims::two && has_az)
      throw ParseError(source + ":1: file has column 'az' but 2 dimensions were requested");
    dims = *expected;
  }
  const bool has_pose = col.count("pose_id") > 0;
  const bool has_unit = col.count("unit_id") > 0;
  const char* axes[3] = {"ax", "ay", "az"};

  Dataset d;
  d.dims = dims;
  int line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    Measurement m;
    for (int j = 0; j < count(dims); ++j) {
      const std::string& text = fields[col[axes[j]]];
      double v;
      if (!parse_double(text, v) || !std::isfinite(v))
        throw ParseError(source + ":" + std::to_string(line_no) + ": column " + axes[j] +
                         ": malformed number '" + text + "'");
      m.a[j] = v;
    }
    d.rows.push_back(m);
    if (has_pose) {
      const std::string& text = fields[col["pose_id"]];
      if (text.empty()) {
        d.pose_id.push_back(std::nullopt);
      } else {
        std::int64_t id = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), id);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
          throw ParseError(source + ":" + std::to_string(line_no) +
                           ": column pose_id: malformed integer '" + text + "'");
        d.pose_id.push_back(id);
      }
    }
    if (has_unit) d.unit_id.push_back(fields[col["unit_id"]]);
  }
  if (d.rows.empty()) throw ParseError(source + ": no data rows after the header");
  return d;
}

Dataset read_measurements_file(const std::string& path, std::optional<Dims> expected) {
  auto in = open_input(path);
  return read_measurements(in, path, expected);
}

void write_measurements(std::ostream& out, const Dataset& d) {
  out << "ax,ay";
  if (d.dims == Dims::three) out << ",az";
  if (d.has_pose_ids()) out << ",pose_id";
  if (d.has_unit_ids()) out << ",unit_id";
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (int j = 0; j < count(d.dims); ++j) out << (j ? "," : "") << csv_double(d.rows[i].a[j]);
    if (d.has_pose_ids()) {
      out << ',';
      if (d.pose_id[i]) out << *d.pose_id[i];
    }
    if (d.has_unit_ids()) out << ',' << d.unit_id[i];
    out << '\n';
  }
}

// ------------------------------------------------------------------- draws

PosteriorDraws read_draws(std::istream& in, const std::string& source) {
  std::string line;
  if (!read_line(in, line)) throw ParseError(source + ": empty file (expected a header row)");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "chain" || header[1] != "iteration")
    throw ParseError(source + ":1: header must start with chain,iteration followed by parameter names");
  PosteriorDraws draws;
  draws.names.assign(header.begin() + 2, header.end());
  std::vector<int> per_chain;
  int line_no = 1;
  long current_chain = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    long chain = 0, iteration = 0;
    auto parse_int = [&](const std::string& text, long& v, const char* name) {
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ParseError(where + ": column " + name + ": malformed integer '" + text + "'");
    };
    parse_int(fields[0], chain, "chain");
    parse_int(fields[1], iteration, "iteration");
    if (chain != current_chain) {
      if (chain != current_chain + 1)
        throw ParseError(where + ": chains must be numbered 1, 2, ... in order");
      current_chain = chain;
      per_chain.push_back(0);
    }
    if (iteration != per_chain.back() + 1)
      throw ParseError(where + ": iterations within a chain must run 1, 2, ...");
    ++per_chain.back();
    for (std::size_t k = 2; k < fields.size(); ++k) {
      double v;
      if (!parse_double(fields[k], v))
        throw ParseError(where + ": column " + header[k] + ": malformed number '" + fields[k] + "'");
      draws.values.push_back(v);
    }
  }
  if (per_chain.empty()) throw ParseError(source + ": no draws after the header");
  for (int n : per_chain)
    if (n != per_chain.front())
      throw ParseError(source + ": ragged chains (chain lengths differ: " +
                       std::to_string(per_chain.front()) + " vs " + std::to_string(n) + ")");
  draws.chains = static_cast<int>(per_chain.size());
  draws.samples = per_chain.front();
  return draws;
}

PosteriorDraws read_draws_file(const std::string& path) {
  auto in = open_input(path);
  return read_draws(in, path);
}

void write_draws(std::ostream& out, const PosteriorDraws& draws) {
  out << "chain,iteration";
  for (const auto& n : draws.names) out << ',' << n;
  out << '\n';
  for (int c = 0; c < draws.chains; ++c)
    for (int s = 0; s < draws.samples; ++s) {
      out << c + 1 << ',' << s + 1;
      for (std::size_t p = 0; p < draws.params(); ++p) out << ',' << csv_double(draws.at(c, s, p));
      out << '\n';
    }
}

// ----------------------------------------------------------------- summary

const ParameterSummary* SummaryUnit::find(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

Vec3 SummaryUnit::median_b() const {
  Vec3 b{0.0, 0.0, 0.0};
  for (int j = 0; j < count(dims); ++j) {
    const auto* p = find("b" + std::to_string(j + 1));
    if (!p) throw ParseError("summary unit '" + unit_id + "' lacks b" + std::to_string(j + 1));
    b[j] = p->median;
  }
  return b;
}

Vec3 SummaryUnit::median_s() const {
  Vec3 s{1.0, 1.0, 1.0};
  for (int j = 0; j < count(dims); ++j) {
    const std::string idx = std::to_string(j + 1);
    if (const auto* sinv = find("sinv" + idx))
      s[j] = 1.0 / sinv->median;
    else if (const auto* p = find("s" + idx))
      s[j] = p->median;
    else
      throw ParseError("summary unit '" + unit_id + "' lacks s" + idx + " and sinv" + idx);
  }
  return s;
}

void write_summary(std::ostream& out, const FitResult& fit, const RunConfig& cfg) {
  TextBlock root;
  for (const auto& u : fit.units) {
    TextBlock& ub = root.add_child("unit", u.unit_id);
    ub.set("model", to_string(u.model));
    ub.set("dimensions", std::to_string(count(u.dims)));
    ub.set("rows", std::to_string(u.rows));
    ub.set("chains", std::to_string(u.draws.chains));
    ub.set("warmup", std::to_string(cfg.sampler.warmup));
    ub.set("samples", std::to_string(u.draws.samples));
    ub.set("seed", std::to_string(cfg.sampler.seed));
    ub.set("rhat_max", format_double(u.summary.thresholds.rhat_max));
    ub.set("ess_min", format_double(u.summary.thresholds.ess_frac * u.summary.total_draws));
    ub.set("divergences", std::to_string(u.draws.total_divergences()));
    ub.set("verdict", u.summary.pass ? "pass" : "fail");
    for (const auto& r : u.summary.reasons) ub.set("reason", r);
    for (const auto& w : u.warnings) ub.set("warning", w);
    for (const auto& p : u.summary.parameters) {
      TextBlock& pb = ub.add_child("parameter", p.name);
      pb.set("median", format_double(p.median));
      pb.set("q05", format_double(p.q05));
      pb.set("q95", format_double(p.q95));
      pb.set("mean", format_double(p.mean));
      pb.set("sd", format_double(p.sd));
      pb.set("rhat", optional_number(p.rhat));
      pb.set("ess", optional_number(p.ess));
    }
  }
  out << "# posterior summary: median and 90% interval (q05, q95) per parameter\n";
  write_structured_text(out, root);
}

void write_summary_csv(std::ostream& out, const FitResult& fit) {
  out << "unit_id,parameter,median,q05,q95,rhat,ess\n";
  for (const auto& u : fit.units)
    for (const auto& p : u.summary.parameters)
      out << u.unit_id << ',' << p.name << ',' << csv_double(p.median) << ',' << csv_double(p.q05) << ','
          << csv_double(p.q95) << ',' << (p.rhat ? csv_double(*p.rhat) : "NA") << ','
          << (p.ess ? csv_double(*p.ess) : "NA") << '\n';
}

std::vector<SummaryUnit> read_summary(std::istream& in, const std::string& source) {
  const TextBlock root = parse_structured_text(in, source);
  std::vector<SummaryUnit> units;
  for (const auto& ub : root.children) {
    const std::string where = source + ":" + std::to_string(ub.line);
    if (ub.kind != "unit") throw ParseError(where + ": unexpected block '" + ub.kind + "'");
    SummaryUnit u;
    u.unit_id = ub.label;
    const std::string* model = ub.get("model");
    const std::string* dims = ub.get("dimensions");
    if (!model || !dims) throw ParseError(where + ": unit block needs model and dimensions");
    try {
      u.model = model_kind_from_string(*model);
      u.dims = dims_from_int(std::stoi(*dims));
    } catch (const std::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    const std::string* verdict = ub.get("verdict");
    u.pass = verdict && *verdict == "pass";
    for (const auto& pb : ub.children) {
      const std::string pwhere = source + ":" + std::to_string(pb.line);
      if (pb.kind != "parameter") throw ParseError(pwhere + ": unexpected block '" + pb.kind + "'");
      ParameterSummary p;
      p.name = pb.label;
      p.median = parse_required(pb, "median", pwhere);
      p.q05 = parse_required(pb, "q05", pwhere);
      p.q95 = parse_required(pb, "q95", pwhere);
      if (pb.get("mean")) p.mean = parse_required(pb, "mean", pwhere);
      if (pb.get("sd")) p.sd = parse_required(pb, "sd", pwhere);
      if (const auto* r = pb.get("rhat")) p.rhat = parse_optional(*r, pwhere);
      if (const auto* e = pb.get("ess")) p.ess = parse_optional(*e, pwhere);
      u.parameters.push_back(std::move(p));
    }
    units.push_back(std::move(u));
  }
  if (units.empty()) throw ParseError(source + ": summary contains no unit blocks");
  return units;
}

std::vector<SummaryUnit> read_summary_file(const std::string& path) {
  auto in = open_input(path);
  return read_summary(in, path);
}

// ------------------------------------------------------------------ config

TextBlock config_to_text(const RunConfig& cfg) {
  TextBlock root;
  root.set("model", to_string(cfg.model));
  root.set("dimensions", std::to_string(count(cfg.dims)));
  root.set("average_poses", cfg.average_poses ? "true" : "false");
  TextBlock& pr = root.add_child("priors");
  pr.set("b_sd", format_double(cfg.priors.b_sd));
  pr.set("sigma_sd", format_double(cfg.priors.sigma_sd));
  pr.set("s_log_mu", format_double(cfg.priors.s_log_mu));
  pr.set("s_log_sd", format_double(cfg.priors.s_log_sd));
  TextBlock& sm = root.add_child("sampler");
  sm.set("chains", std::to_string(cfg.sampler.chains));
  sm.set("warmup", std::to_string(cfg.sampler.warmup));
  sm.set("samples", std::to_string(cfg.sampler.samples));
  sm.set("seed", std::to_string(cfg.sampler.seed));
  sm.set("target_accept", format_double(cfg.sampler.target_accept));
  sm.set("max_leapfrog", std::to_string(cfg.sampler.max_leapfrog));
  if (cfg.sampler.init.kind == InitPolicy::Kind::user_values) {
    sm.set("init", "user_values");
    std::string values;
    for (double v : cfg.sampler.init.values) values += (values.empty() ? "" : ", ") + format_double(v);
    sm.set("init_values", values);
  } else {
    sm.set("init", "default_jitter");
  }
  TextBlock& th = root.add_child("thresholds");
  th.set("rhat_max", format_double(cfg.thresholds.rhat_max));
  th.set("ess_frac", format_double(cfg.thresholds.ess_frac));
  return root;
}

namespace {

void check_keys(const TextBlock& b, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : b.entries)
    if (!allowed.count(k)) throw ParseError(where + ": unknown key '" + k + "'");
}

long parse_integer(const std::string& text, const std::string& where, const std::string& key) {
  long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ParseError(where + ": '" + key + "' must be an integer, got '" + text + "'");
  return v;
}

}  // namespace

RunConfig config_from_text(const TextBlock& root, const std::string& source) {
  RunConfig cfg;
  check_keys(root, {"model", "dimensions", "average_poses"}, source);
  try {
    if (const auto* v = root.get("model")) cfg.model = model_kind_from_string(*v);
    if (const auto* v = root.get("dimensions")) cfg.dims = dims_from_int(static_cast<int>(parse_integer(*v, source, "dimensions")));
  } catch (const PreconditionError& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (const auto* v = root.get("average_poses")) {
    if (*v != "true" && *v != "false") throw ParseError(source + ": average_poses must be true or false");
    cfg.average_poses = *v == "true";
  }
  for (const auto& b : root.children) {
    const std::string where = source + ":" + std::to_string(b.line);
    auto num = [&](const char* key, double& field) {
      if (b.get(key)) field = parse_required(b, key, where);
    };
    if (b.kind == "priors") {
      check_keys(b, {"b_sd", "sigma_sd", "s_log_mu", "s_log_sd"}, where);
      num("b_sd", cfg.priors.b_sd);
      num("sigma_sd", cfg.priors.sigma_sd);
      num("s_log_mu", cfg.priors.s_log_mu);
      num("s_log_sd", cfg.priors.s_log_sd);
    } else if (b.kind == "sampler") {
      check_keys(b, {"chains", "warmup", "samples", "seed", "target_accept", "max_leapfrog", "init", "init_values"},
                 where);
      if (const auto* v = b.get("chains")) cfg.sampler.chains = static_cast<int>(parse_integer(*v, where, "chains"));
      if (const auto* v = b.get("warmup")) cfg.sampler.warmup = static_cast<int>(parse_integer(*v, where, "warmup"));
      if (const auto* v = b.get("samples")) cfg.sampler.samples = static_cast<int>(parse_integer(*v, where, "samples"));
      if (const auto* v = b.get("seed")) cfg.sampler.seed = static_cast<std::uint64_t>(parse_integer(*v, where, "seed"));
      if (const auto* v = b.get("max_leapfrog"))
        cfg.sampler.max_leapfrog = static_cast<int>(parse_integer(*v, where, "max_leapfrog"));
      num("target_accept", cfg.sampler.target_accept);
      if (const auto* v = b.get("init")) {
        if (*v == "default_jitter")
          cfg.sampler.init.kind = InitPolicy::Kind::default_jitter;
        else if (*v == "user_values")
          cfg.sampler.init.kind = InitPolicy::Kind::user_values;
        else
          throw ParseError(where + ": init must be default_jitter or user_values");
      }
      if (const auto* v = b.get("init_values")) {
        cfg.sampler.init.values.clear();
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto first = item.find_first_not_of(' ');
          const auto last = item.find_last_not_of(' ');
          item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
          double x;
          if (!parse_double(item, x)) throw ParseError(where + ": malformed init value '" + item + "'");
          cfg.sampler.init.values.push_back(x);
        }
      }
    } else if (b.kind == "thresholds") {
      check_keys(b, {"rhat_max", "ess_frac"}, where);
      num("rhat_max", cfg.thresholds.rhat_max);
      num("ess_frac", cfg.thresholds.ess_frac);
    } else {
      throw ParseError(where + ": unknown block '" + b.kind + "'");
    }
  }
  try {
    cfg.validate();
  } catch (const PreconditionError& e) {
    throw ParseError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig read_config_file(const std::string& path) {
  auto in = open_input(path);
  return config_from_text(parse_structured_text(in, path), path);
}

void write_config(std::ostream& out, const RunConfig& cfg) { write_structured_text(out, config_to_text(cfg)); }

// ------------------------------------------------------------- diagnostics

void write_trace(std::ostream& out, const PosteriorDraws& draws) {
  out << "chain,iteration,parameter,value\n";
  for (std::size_t p = 0; p < draws.params(); ++p)
    for (int c = 0; c < draws.chains; ++c)
      for (int s = 0; s < draws.samples; ++s)
        out << c + 1 << ',' << s + 1 << ',' << draws.names[p] << ',' << csv_double(draws.at(c, s, p)) << '\n';
}

void write_diagnostics_table(std::ostream& out, const SummaryTable& table) {
  out << "parameter,median,q05,q95,mean,sd,rhat,ess\n";
  for (const auto& p : table.parameters)
    out << p.name << ',' << csv_double(p.median) << ',' << csv_double(p.q05) << ',' << csv_double(p.q95) << ','
        << csv_double(p.mean) << ',' << csv_double(p.sd) << ',' << (p.rhat ? csv_double(*p.rhat) : "NA") << ','
        << (p.ess ? csv_double(*p.ess) : "NA") << '\n';
}

void write_norms(std::ostream& out, const Dataset& raw, const Dataset& calibrated) {
  const auto before = radial_norms(raw);
  const auto after = radial_norms(calibrated);
  out << "row,unit_id,norm_raw,norm_calibrated\n";
  for (std::size_t i = 0; i < before.size(); ++i)
    out << i + 1 << ',' << (raw.has_unit_ids() ? raw.unit_id[i] : std::string("default")) << ','
        << csv_double(before[i]) << ',' << csv_double(after[i]) << '\n';
}

void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": " + std::strerror(errno));
    body(out);
    out.flush();
    if (!out) throw IoError(tmp.string() + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError(path + ": " + ec.message());
  }
}

}  // namespace bayescal::io
