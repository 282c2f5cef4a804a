// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "lsrgan/checkpoint.hpp"
#include "lsrgan/error.hpp"

namespace lsrgan {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

bool parse_value(const std::string& text, double& out) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_value(const std::string& text, std::uint64_t& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    begin += 2;
    base = 16;
  }
  const auto [ptr, ec] = std::from_chars(begin, end, out, base);
  return ec == std::errc() && ptr == end && begin != end;
}

bool parse_value(const std::string& text, bool& out) {
  if (text == "true" || text == "yes" || text == "on" || text == "1") {
    out = true;
    return true;
  }
  if (text == "false" || text == "no" || text == "off" || text == "0") {
    out = false;
    return true;
  }
  return false;
}

class Reader {
 public:
  Reader(const pt::ptree& root, std::vector<std::string>& errors) : root_(root), errors_(errors) {}

  std::optional<std::string> raw(const std::string& key) {
    known_.insert(key);
    const auto node = root_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return std::nullopt;
    return trim(node->data());
  }

  template <typename V>
  void get(const std::string& key, V& out) {
    const auto text = raw(key);
    if (!text) return;
    V value{};
    if (!parse_value(*text, value)) {
      errors_.push_back(key + ": cannot parse '" + *text + "'");
      return;
    }
    out = value;
  }

  void get_path(const std::string& key, std::filesystem::path& out) {
    if (const auto text = raw(key)) out = *text;
  }

  template <typename Parse, typename V>
  void get_enum(const std::string& key, V& out, Parse parse) {
    const auto text = raw(key);
    if (!text) return;
    try {
      out = parse(*text);
    } catch (const ConfigError& e) {
      errors_.push_back(key + ": " + e.what());
    }
  }

  template <typename V>
  void get_list(const std::string& key, std::vector<V>& out) {
    const auto text = raw(key);
    if (!text) return;
    std::vector<V> values;
    for (const auto& part : split_list(*text)) {
      V v{};
      if (!parse_value(part, v)) {
        errors_.push_back(key + ": cannot parse list item '" + part + "'");
        return;
      }
      values.push_back(v);
    }
    out = std::move(values);
  }

  void report_unknown() const {
    for (const auto& [name, child] : root_) {
      if (child.empty()) {
        if (!known_.count(name)) errors_.push_back("unknown key '" + name + "'");
        continue;
      }
      for (const auto& [key, value] : child) {
        const std::string full = name + "." + key;
        if (!known_.count(full)) errors_.push_back("unknown key '" + key + "' in [" + name + "]");
      }
    }
  }

 private:
  const pt::ptree& root_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

void throw_all(const std::string& title, const std::vector<std::string>& problems) {
  std::string msg = title;
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ConfigError(msg);
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }

  RunConfig c;
  std::vector<std::string> errors;
  Reader r(root, errors);
  r.get("seed", c.seed);
  r.get_path("output_dir", c.output_dir);

  std::string source = "synthetic";
  if (const auto s = r.raw("data.source")) source = *s;
  if (source == "synthetic") {
    c.data.source = DatasetSpec::Source::kSynthetic;
  } else if (source == "directory") {
    c.data.source = DatasetSpec::Source::kDirectory;
  } else {
    errors.push_back("data.source: expected synthetic or directory, got '" + source + "'");
  }
  c.data.synth_seed = c.seed;
  r.get("data.synth_seed", c.data.synth_seed);
  r.get_path("data.directory", c.data.directory);
  r.get("data.patch_size", c.data.patch_size);
  r.get("data.augment", c.data.augment);
  r.get("data.count", c.data.count);

  r.get("network.g_blocks", c.network.g_blocks);
  r.get("network.g_channels", c.network.g_channels);
  r.get("network.d_channels", c.network.d_channels);
  r.get("network.d_hidden", c.network.d_hidden);
  r.get("network.l_channels", c.network.l_channels);
  std::vector<std::size_t> probe;
  r.get_list("network.probe_channels", probe);
  if (!probe.empty()) {
    if (probe.size() != 3) {
      errors.push_back("network.probe_channels: expected three values");
    } else {
      std::copy(probe.begin(), probe.end(), c.network.probe_channels);
    }
  }
  r.get("network.probe_stage", c.network.probe_stage);
  r.get("network.probe_seed", c.network.probe_seed);
  r.get_path("network.probe_weights", c.probe_weights);
  c.network.hr_size = c.data.patch_size;

  r.get("loss.lambda", c.weights.lambda);
  r.get("loss.eta", c.weights.eta);
  r.get("loss.mu", c.weights.mu);
  r.get("loss.lsr_sign", c.weights.lsr_sign);
  r.get("loss.h", c.ccx.h);
  r.get("loss.epsilon", c.ccx.epsilon);
  r.get_enum("loss.reference", c.ccx.reference, parse_reference_mode);
  r.get_enum("loss.distance", c.ccx.distance, parse_distance_mode);

  r.get("pretrain.lr", c.pretrain.base_lr);
  r.get("pretrain.halve_every", c.pretrain.halve_every);
  r.get("pretrain.max_iters", c.pretrain.max_iters);
  r.get("pretrain.batch_size", c.pretrain.batch_size);

  r.get("finetune.lr", c.finetune.base_lr);
  r.get_list("finetune.milestones", c.finetune.milestones);
  r.get("finetune.max_iters", c.finetune.max_iters);
  r.get("finetune.batch_size", c.finetune.batch_size);
  r.get_enum("finetune.kind", c.kind, parse_objective_kind);

  r.get("adam.beta1", c.adam.beta1);
  r.get("adam.beta2", c.adam.beta2);
  r.get("adam.eps", c.adam.eps);
  r.get("adam.weight_decay", c.adam.weight_decay);

  r.report_unknown();
  if (!errors.empty()) throw_all("invalid config:", errors);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> out;
  auto add = [&out](const std::string& prefix, const std::vector<std::string>& items) {
    for (const auto& i : items) out.push_back(prefix + i);
  };
  add("", data.violations());
  add("network: ", network.violations());
  add("loss: ", weights.violations());
  add("loss: ", ccx.violations());
  add("pretrain: ", pretrain.violations());
  add("finetune: ", finetune.violations());
  add("", adam.violations());
  if (!probe_weights.empty() && !std::filesystem::is_regular_file(probe_weights)) {
    out.push_back("network.probe_weights does not exist: " + probe_weights.string());
  }
  if (output_dir.empty()) {
    out.push_back("output_dir must not be empty");
  } else {
    const auto parent = std::filesystem::absolute(output_dir).parent_path();
    if (!std::filesystem::is_directory(parent)) {
      out.push_back("output_dir parent does not exist: " + parent.string());
    }
  }
  return out;
}

void RunConfig::validate() const {
  const auto problems = violations();
  if (!problems.empty()) throw_all("invalid config:", problems);
}

TrainConfig RunConfig::train_config(Stage stage) const {
  TrainConfig t;
  t.schedule = stage == Stage::kPretrain ? pretrain : finetune;
  t.schedule.stage = stage;
  t.adam = adam;
  t.seed = seed;
  t.kind = kind;
  t.weights = weights;
  t.ccx = ccx;
  return t;
}

Networks<float> initial_networks(const RunConfig& config) {
  auto nets = init_networks<float>(config.network, config.seed);
  if (!config.probe_weights.empty()) {
    restore_params(Checkpoint::load(config.probe_weights), "P", nets.probe.params);
    nets.probe.params.set_requires_grad(false);
  }
  return nets;
}

}  // namespace lsrgan
