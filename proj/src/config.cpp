#include "voxmt/config.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "voxmt/errors.hpp"

namespace voxmt {

ClassMap PipelineConfig::class_map() const {
  ClassMap m;
  m.num_classes = num_classes;
  m.thing_classes = thing_classes;
  return m;
}

std::vector<int32_t> PipelineConfig::stuff_classes() const {
  const std::vector<int32_t> idx = class_map().thing_index();
  std::vector<int32_t> out;
  for (int32_t c = 0; c < num_classes; ++c) {
    if (idx[static_cast<std::size_t>(c)] < 0) out.push_back(c);
  }
  return out;
}

void PipelineConfig::validate() const {
  voxel.validate();
  class_map().validate();
  const auto dims = voxel.grid_dims();
  for (int a = 0; a < 3; ++a) {
    if (dims[a] % 8 != 0) {
      throw ConfigError("grid axis " + std::to_string(a) +
                        " must be divisible by the 8x downsampling factor, got " +
                        std::to_string(dims[a]));
    }
  }
  if (vfe_out <= 0 || gcp_out <= 0) throw ConfigError("channel widths must be positive");
  if (fallback_class < 0 || fallback_class >= num_classes) {
    throw ConfigError("fallback_class out of range");
  }
  if (max_boxes < 0) throw ConfigError("max_boxes must be non-negative");
  if (stage2_point_hidden <= 0 || stage2_box_hidden <= 0) {
    throw ConfigError("stage-2 hidden widths must be positive");
  }
}

PipelineConfig profile_config(const std::string& name) {
  PipelineConfig cfg;
  cfg.profile = name;
  if (name == "waymo") {
    cfg.voxel.range_min = {-75.2, -75.2, -2.0};
    cfg.voxel.range_max = {75.2, 75.2, 4.0};
    cfg.voxel.voxel_size = {0.1, 0.1, 0.15};
    cfg.num_classes = 22;
    cfg.thing_classes = {1, 2, 3, 4, 5, 6, 7};
  } else if (name == "nuscenes") {
    cfg.voxel.range_min = {-54.0, -54.0, -5.0};
    cfg.voxel.range_max = {54.0, 54.0, 3.0};
    cfg.voxel.voxel_size = {0.075, 0.075, 0.2};
    cfg.num_classes = 17;
    cfg.thing_classes = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  } else if (name == "toy") {
    cfg.voxel.range_min = {-16.0, -16.0, -2.0};
    cfg.voxel.range_max = {16.0, 16.0, 6.0};
    cfg.voxel.voxel_size = {1.0, 1.0, 0.5};
    cfg.unet.encoder_widths = {4, 8, 16, 32};
    cfg.unet.decoder_widths = {16, 8, 4, 4};
    cfg.gcp.level1_width = 16;
    cfg.gcp.level2_width = 32;
    cfg.gcp_out = 32;
    cfg.num_classes = 6;
    cfg.thing_classes = {2, 3, 4, 5};
    cfg.max_boxes = 20;
    cfg.stage2_point_hidden = 16;
    cfg.stage2_box_hidden = 16;
  } else {
    throw ConfigError("unknown profile '" + name + "'");
  }
  return cfg;
}

namespace {

std::vector<int32_t> parse_int_list(const std::string& v, const std::string& key) {
  std::vector<int32_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad integer list entry '" + item + "'");
    }
  }
  return out;
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  }
}

int32_t parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int32_t i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
  }
}

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "profile") return;  // handled in the first pass
  if (key == "range_min_x") cfg.voxel.range_min[0] = parse_double(value, key);
  else if (key == "range_min_y") cfg.voxel.range_min[1] = parse_double(value, key);
  else if (key == "range_min_z") cfg.voxel.range_min[2] = parse_double(value, key);
  else if (key == "range_max_x") cfg.voxel.range_max[0] = parse_double(value, key);
  else if (key == "range_max_y") cfg.voxel.range_max[1] = parse_double(value, key);
  else if (key == "range_max_z") cfg.voxel.range_max[2] = parse_double(value, key);
  else if (key == "voxel_size_x") cfg.voxel.voxel_size[0] = parse_double(value, key);
  else if (key == "voxel_size_y") cfg.voxel.voxel_size[1] = parse_double(value, key);
  else if (key == "voxel_size_z") cfg.voxel.voxel_size[2] = parse_double(value, key);
  else if (key == "vfe_out") cfg.vfe_out = parse_int(value, key);
  else if (key == "enc_depths") cfg.unet.encoder_depths = parse_int_list(value, key);
  else if (key == "enc_widths") cfg.unet.encoder_widths = parse_int_list(value, key);
  else if (key == "dec_widths") cfg.unet.decoder_widths = parse_int_list(value, key);
  else if (key == "gcp_depth1") cfg.gcp.level1_depth = parse_int(value, key);
  else if (key == "gcp_depth2") cfg.gcp.level2_depth = parse_int(value, key);
  else if (key == "gcp_width1") cfg.gcp.level1_width = parse_int(value, key);
  else if (key == "gcp_width2") cfg.gcp.level2_width = parse_int(value, key);
  else if (key == "gcp_out") cfg.gcp_out = parse_int(value, key);
  else if (key == "num_classes") cfg.num_classes = parse_int(value, key);
  else if (key == "thing_classes") cfg.thing_classes = parse_int_list(value, key);
  else if (key == "fallback_class") cfg.fallback_class = parse_int(value, key);
  else if (key == "max_boxes") cfg.max_boxes = parse_int(value, key);
  else if (key == "score_thresh") cfg.score_thresh = parse_double(value, key);
  else if (key == "stage2_point_hidden") cfg.stage2_point_hidden = parse_int(value, key);
  else if (key == "stage2_box_hidden") cfg.stage2_box_hidden = parse_int(value, key);
  else if (key == "per_loss_uncertainty") cfg.per_loss_uncertainty = parse_int(value, key) != 0;
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config '" + path + "'");

  std::vector<std::pair<std::string, std::string>> entries;
  std::string profile = "waymo";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config '" + path + "' line " + std::to_string(lineno) +
                        ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "profile") profile = value;
    entries.emplace_back(key, value);
  }

  PipelineConfig cfg = profile_config(profile);
  for (const auto& [key, value] : entries) apply_key(cfg, key, value);
  cfg.validate();
  return cfg;
}

}  // namespace voxmt
