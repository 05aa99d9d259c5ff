// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "kbc/error.hpp"
#include "kbc/harness.hpp"
#include "kbc/parser.hpp"

namespace kbc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", key, v));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out))
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, v));
  return out;
}

std::vector<fs::path> to_paths(const std::string& v, const fs::path& base) {
  std::vector<fs::path> out;
  for (const auto& item : split_list(v)) {
    fs::path p(item);
    out.push_back(p.is_absolute() || base.empty() ? p : base / p);
  }
  return out;
}

CoverageMode to_mode(const std::string& key, const std::string& v) {
  try {
    return coverage_mode_from_string(v);
  } catch (const Error&) {
    throw ConfigError(fmt::format("{}: unknown coverage mode '{}'", key, v));
  }
}

// Returns false for keys this function does not know.
bool apply_key(ScenarioConfig& cfg, const std::string& key, const std::string& v,
               const fs::path& base) {
  Policy& p = cfg.policy;
  if (key == "seed") cfg.seed = to_u64(key, v);
  else if (key == "steps") cfg.steps = to_u64(key, v);
  else if (key == "arrival_p") cfg.arrival_p = to_double(key, v);
  else if (key == "arrival_mode") {
    if (v == "geometric") cfg.arrival_mode = ArrivalMode::Geometric;
    else if (v == "preload") cfg.arrival_mode = ArrivalMode::Preload;
    else throw ConfigError("arrival_mode: expected geometric or preload, got '" + v + "'");
  } else if (key == "capacity") p.capacity = to_u64(key, v);
  else if (key == "forget_fraction") p.forget_fraction = to_double(key, v);
  else if (key == "beta") p.beta = to_double(key, v);
  else if (key == "theta_p") p.theta_p = Threshold::parse(v);
  else if (key == "theta_d") p.theta_d = Threshold::parse(v);
  else if (key == "consolidation_class") {
    if (v.empty() || v == "none") p.consolidation_class.reset();
    else p.consolidation_class = v;
  } else if (key == "rule_evidence_coverage") p.coverage.rule_evidence = to_mode(key, v);
  else if (key == "rule_rule_coverage") p.coverage.rule_rule = to_mode(key, v);
  else if (key == "max_depth") p.coverage.limits.max_depth = to_u64(key, v);
  else if (key == "max_facts") p.coverage.limits.max_facts = to_u64(key, v);
  else if (key == "max_term_depth") p.coverage.limits.max_term_depth = to_u64(key, v);
  else if (key == "classes") {
    cfg.classes.clear();
    for (auto& c : split_list(v)) cfg.classes.push_back(c);
  } else if (key == "background") cfg.background = to_paths(v, base);
  else if (key == "evidence") cfg.evidence = to_paths(v, base);
  else if (key == "candidates") cfg.candidates = to_paths(v, base);
  else if (key == "targets") cfg.targets = to_paths(v, base);
  else return false;
  return true;
}

struct Line {
  std::size_t number;
  std::string key;
  std::string value;
  bool section;
};

std::vector<Line> lex(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("line {}: unterminated section", number));
      out.push_back({number, trim(std::string_view(line).substr(1, line.size() - 2)), {}, true});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value'", number));
    out.push_back({number, trim(std::string_view(line).substr(0, eq)),
                   trim(std::string_view(line).substr(eq + 1)), false});
  }
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(arrival_p > 0 && arrival_p <= 1)) throw ConfigError("arrival_p must lie in (0, 1]");
  if (phases.empty() && evidence.empty() && candidates.empty())
    throw ConfigError("scenario names no evidence or candidate pool");
  for (const auto& ph : phases) {
    if (ph.start < 1 || ph.end < ph.start)
      throw ConfigError(fmt::format("phase {}..{} is not a valid step range", ph.start, ph.end));
  }
  for (std::size_t i = 1; i < phases.size(); ++i)
    if (phases[i].start <= phases[i - 1].end) throw ConfigError("phases overlap");
  if (!classes.empty()) policy.validate(classes);
}

ScenarioConfig parse_scenario(std::string_view text, const fs::path& base_dir) {
  ScenarioConfig cfg;
  PhaseConfig* phase = nullptr;
  std::set<std::string> seen;
  for (const auto& l : lex(text)) {
    if (l.section) {
      if (l.key != "phase") throw ConfigError(fmt::format("line {}: unknown section [{}]", l.number, l.key));
      cfg.phases.emplace_back();
      phase = &cfg.phases.back();
      phase->end = 0;
      continue;
    }
    try {
      if (phase) {
        if (l.key == "start") phase->start = to_u64(l.key, l.value);
        else if (l.key == "end") phase->end = to_u64(l.key, l.value);
        else if (l.key == "evidence") phase->evidence = to_paths(l.value, base_dir);
        else if (l.key == "candidates") phase->candidates = to_paths(l.value, base_dir);
        else throw ConfigError("unknown phase key '" + l.key + "'");
        continue;
      }
      if (!seen.insert(l.key).second) throw ConfigError("duplicate key '" + l.key + "'");
      if (!apply_key(cfg, l.key, l.value, base_dir))
        throw ConfigError("unknown key '" + l.key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", l.number, e.what()));
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const fs::path& path) {
  return parse_scenario(read_text(path), path.parent_path());
}

void GridConfig::validate() const {
  if (capacities.empty() || fractions.empty()) throw ConfigError("grid lists must be non-empty");
  if (repetitions == 0) throw ConfigError("repetitions must be positive");
  for (double f : fractions)
    if (!(f > 0 && f <= 1)) throw ConfigError("grid fractions must lie in (0, 1]");
  base.validate();
}

GridConfig parse_grid(std::string_view text, const fs::path& base_dir) {
  GridConfig grid;
  const auto lines = lex(text);
  bool have_scenario = false;
  for (const auto& l : lines) {
    if (l.section) throw ConfigError(fmt::format("line {}: sections are not allowed in grids", l.number));
    if (l.key == "scenario") {
      const auto paths = to_paths(l.value, base_dir);
      if (paths.size() != 1) throw ConfigError("scenario takes one path");
      grid.base = load_scenario(paths.front());
      have_scenario = true;
    }
  }
  if (!have_scenario) throw ConfigError("grid needs a 'scenario = <file>' line");
  for (const auto& l : lines) {
    try {
      if (l.key == "scenario") continue;
      if (l.key == "capacities") {
        grid.capacities.clear();
        for (const auto& v : split_list(l.value)) grid.capacities.push_back(to_u64(l.key, v));
      } else if (l.key == "fractions") {
        grid.fractions.clear();
        for (const auto& v : split_list(l.value)) grid.fractions.push_back(to_double(l.key, v));
      } else if (l.key == "repetitions") {
        grid.repetitions = to_u64(l.key, l.value);
      } else if (!apply_key(grid.base, l.key, l.value, base_dir)) {
        throw ConfigError("unknown key '" + l.key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", l.number, e.what()));
    }
  }
  grid.validate();
  return grid;
}

GridConfig load_grid(const fs::path& path) {
  return parse_grid(read_text(path), path.parent_path());
}

const ScenarioData::Phase* ScenarioData::phase_at(std::size_t step) const {
  for (const auto& ph : phases)
    if (step >= ph.start && step <= ph.end) return &ph;
  return nullptr;
}

ScenarioData load_data(const ScenarioConfig& cfg) {
  ScenarioData data;
  data.classes = cfg.classes;
  RuleId next = 1;
  std::map<fs::path, Program> cache;

  auto load = [&](const fs::path& path) -> const Program& {
    const fs::path key = path.lexically_normal();
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    ParseOptions opt;
    opt.first_id = next;
    opt.classes = data.classes;
    Program prog;
    try {
      prog = parse_file(key, opt);
    } catch (const ParseError& e) {
      throw ParseError(key.string() + ":" + e.detail(), e.line(), e.column());
    }
    if (data.classes.empty()) data.classes = prog.classes;
    next = std::max(next, prog.max_id() + 1);
    for (auto& [id, res] : prog.residuals) data.residuals[id] = res;
    return cache.emplace(key, std::move(prog)).first->second;
  };

  for (const auto& p : cfg.background)
    for (Rule r : load(p).rules) {
      if (r.label) throw ConfigError(p.string() + ": background files cannot hold evidence");
      r.origin = Origin::Background;
      r.is_protected = true;
      data.background.push_back(std::move(r));
    }

  auto fill = [&](ScenarioData::Phase& ph, const std::vector<fs::path>& ev,
                  const std::vector<fs::path>& cand) {
    std::set<RuleId> taken;
    for (const auto* list : {&ev, &cand})
      for (const auto& p : *list)
        for (const Rule& r : load(p).rules) {
          if (!taken.insert(r.id).second) continue;
          if (r.origin == Origin::Evidence) ph.evidence.push_back(r);
          else if (r.origin == Origin::Candidate) ph.candidates.push_back(r);
          else throw ConfigError(p.string() + ": background clauses belong in a background file");
        }
  };

  if (cfg.phases.empty()) {
    ScenarioData::Phase ph;
    ph.start = 1;
    ph.end = std::max<std::size_t>(cfg.steps, 1);
    fill(ph, cfg.evidence, cfg.candidates);
    data.phases.push_back(std::move(ph));
  } else {
    for (const auto& pc : cfg.phases) {
      ScenarioData::Phase ph;
      ph.start = pc.start;
      ph.end = pc.end;
      fill(ph, pc.evidence, pc.candidates);
      data.phases.push_back(std::move(ph));
    }
  }
  for (const auto& p : cfg.targets)
    for (const Rule& r : load(p).rules) data.targets.push_back(r);

  if (data.classes.empty()) throw ConfigError("no classes declared by the scenario or its files");
  cfg.policy.validate(data.classes);
  return data;
}

}  // namespace kbc
