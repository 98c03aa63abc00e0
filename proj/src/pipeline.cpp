// SPDX-License-Identifier: Apache-2.0
#include "histaug/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "histaug/degradation.hpp"
#include "histaug/geometric.hpp"
#include "histaug/photometric.hpp"
#include "histaug/preprocess.hpp"

namespace histaug {
namespace {

// ---------------------------------------------------------------------------
// Defaults and legal bounds

ParamRange fixed(double v) { return {v, v}; }
ParamRange range(double lo, double hi) { return {lo, hi}; }

std::vector<GateSpec> default_gates() {
  const double third = 1.0 / 3.0;
  return {
      {"geometric",
       0.9,
       GateMode::one_of,
       {{"d4", third, {}}, {"rotate", third, {{"limit", range(-180, 180)}}}, {"rotate90", third, {}}}},
      {"advanced_geometric",
       1.0,
       GateMode::all_independent,
       {{"shift_scale_rotate",
         0.8,
         {{"shift", range(-0.08, 0.08)}, {"scale", range(0.85, 1.15)}, {"angle", range(-30, 30)}}},
        {"elastic", 0.7, {{"alpha", fixed(40)}, {"sigma", fixed(4)}, {"alpha_affine", fixed(8)}}},
        {"grid_distortion", 0.6, {{"num_steps", fixed(5)}, {"distort_limit", fixed(0.2)}}},
        {"optical_distortion", 0.5, {{"distort_limit", fixed(0.15)}}}}},
      {"color",
       1.0,
       GateMode::all_independent,
       {{"color_jitter",
         0.8,
         {{"brightness", range(0.8, 1.2)},
          {"contrast", range(0.8, 1.2)},
          {"saturation", range(0.85, 1.15)},
          {"hue", range(-0.08, 0.08)}}},
        {"hue_saturation_value",
         0.8,
         {{"hue", range(-15, 15)}, {"saturation", range(-20, 20)}, {"value", range(-15, 15)}}},
        {"brightness_contrast", 0.8, {{"brightness", range(-0.2, 0.2)}, {"contrast", range(-0.2, 0.2)}}},
        {"clahe", 0.4, {{"clip_limit", fixed(2.0)}, {"tile_grid", fixed(4)}}}}},
      {"channel",
       0.4,
       GateMode::all_independent,
       {{"rgb_shift", 0.6, {{"shift", range(-20, 20)}}},
        {"channel_shuffle", 0.3, {}},
        {"to_gray", 0.1, {}}}},
      {"blur_noise",
       1.0,
       GateMode::all_independent,
       {{"gaussian_blur", 0.5, {{"kernel", range(1, 5)}}},
        {"defocus", 0.4, {{"radius", range(1, 4)}, {"alias_blur", range(0.1, 0.3)}}},
        {"motion_blur", 0.3, {{"kernel", range(3, 5)}}},
        {"gauss_noise", 0.4, {{"std", range(10, 50)}}},
        {"iso_noise", 0.3, {{"color_shift", range(0.01, 0.05)}, {"intensity", range(0.1, 0.4)}}},
        {"multiplicative_noise", 0.2, {{"multiplier", range(0.95, 1.05)}}}}},
  };
}

struct Bound {
  double min;
  double max;
  bool integer = false;
  bool positive = false;  // strictly greater than min
};

const std::map<std::string, std::map<std::string, Bound>>& legal_bounds() {
  static const std::map<std::string, std::map<std::string, Bound>> table = {
      {"rotate", {{"limit", {-180, 180}}}},
      {"shift_scale_rotate", {{"shift", {-0.5, 0.5}}, {"scale", {0.5, 1.5}}, {"angle", {-180, 180}}}},
      {"elastic",
       {{"alpha", {0, 1000}}, {"sigma", {0, 100, false, true}}, {"alpha_affine", {0, 100}}}},
      {"grid_distortion", {{"num_steps", {1, 64, true}}, {"distort_limit", {0, 0.99}}}},
      {"optical_distortion", {{"distort_limit", {0, 0.33}}}},
      {"color_jitter",
       {{"brightness", {0, 10}}, {"contrast", {0, 10}}, {"saturation", {0, 10}}, {"hue", {-0.5, 0.5}}}},
      {"hue_saturation_value",
       {{"hue", {-90, 90, true}}, {"saturation", {-255, 255, true}}, {"value", {-255, 255, true}}}},
      {"brightness_contrast", {{"brightness", {-1, 1}}, {"contrast", {-1, 1}}}},
      {"clahe", {{"clip_limit", {0, 100, false, true}}, {"tile_grid", {1, 64, true}}}},
      {"rgb_shift", {{"shift", {-255, 255, true}}}},
      {"gaussian_blur", {{"kernel", {1, 5, true}}}},
      {"defocus", {{"radius", {1, 32, true}}, {"alias_blur", {0, 10, false, true}}}},
      {"motion_blur", {{"kernel", {3, 31, true}}}},
      {"gauss_noise", {{"std", {0, 255}}}},
      {"iso_noise", {{"color_shift", {0, 1}}, {"intensity", {0, 10}}}},
      {"multiplicative_noise", {{"multiplier", {0, 10}}}},
  };
  return table;
}

// Limits handed to the transform functions when replaying resolved values;
// sampling ranges were already validated against the bounds above.
constexpr ShiftScaleRotateLimits kLegalSsr{0.5, 0.5, 180.0};
const ColorJitterParams kLegalJitter{{0, 10}, {0, 10}, {0, 10}, {-0.5, 0.5}};
constexpr HsvShiftLimits kLegalHsv{90, 255, 255};

std::string mode_name(GateMode m) { return m == GateMode::one_of ? "one_of" : "all_independent"; }

GateMode parse_mode(const json& v, const std::string& path) {
  if (v == "one_of") return GateMode::one_of;
  if (v == "all_independent") return GateMode::all_independent;
  throw ParameterError(path + ": mode must be \"one_of\" or \"all_independent\"");
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParameterError(path + ": expected a number");
  return v.get<double>();
}

ParamRange parse_range(const json& v, const std::string& path) {
  if (v.is_number()) return fixed(v.get<double>());
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ParameterError(path + ": expected a number or a [lo, hi] pair");
}

json range_to_json(const ParamRange& r) {
  if (r.lo == r.hi) return r.lo;
  return json::array({r.lo, r.hi});
}

GateSpec* find_gate(std::vector<GateSpec>& gates, const std::string& group) {
  for (auto& g : gates) {
    if (g.group == group) return &g;
  }
  return nullptr;
}

MemberSpec* find_member(GateSpec& gate, const std::string& id) {
  for (auto& m : gate.members) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

void merge_member(MemberSpec& member, const json& doc, const std::string& path) {
  if (!doc.is_object()) throw ParameterError(path + ": expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "probability") {
      member.probability = number_at(value, path + ".probability");
    } else if (key == "params") {
      if (!value.is_object()) throw ParameterError(path + ".params: expected an object");
      for (const auto& [name, v] : value.items()) {
        const std::string ppath = path + ".params." + name;
        auto it = member.params.find(name);
        if (it == member.params.end()) throw ParameterError(ppath + ": unknown parameter");
        it->second = parse_range(v, ppath);
      }
    } else if (key != "id") {
      throw ParameterError(path + "." + key + ": unknown key");
    }
  }
}

void merge_gate(GateSpec& gate, const json& doc, const std::string& path) {
  if (!doc.is_object()) throw ParameterError(path + ": expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "probability") {
      gate.probability = number_at(value, path + ".probability");
    } else if (key == "mode") {
      gate.mode = parse_mode(value, path + ".mode");
    } else if (key == "members") {
      const auto merge_one = [&](const std::string& id, const json& mdoc) {
        const std::string mpath = path + ".members." + id;
        MemberSpec* member = find_member(gate, id);
        if (member == nullptr) throw ParameterError(mpath + ": unknown transform");
        merge_member(*member, mdoc, mpath);
      };
      if (value.is_object()) {
        for (const auto& [id, mdoc] : value.items()) merge_one(id, mdoc);
      } else if (value.is_array()) {
        for (const auto& mdoc : value) {
          if (!mdoc.is_object() || !mdoc.contains("id") || !mdoc["id"].is_string()) {
            throw ParameterError(path + ".members: array entries need an \"id\"");
          }
          merge_one(mdoc["id"].get<std::string>(), mdoc);
        }
      } else {
        throw ParameterError(path + ".members: expected an object or array");
      }
    } else if (key != "group") {
      throw ParameterError(path + "." + key + ": unknown key");
    }
  }
}

void validate(const PipelineSpec& spec) {
  const auto& bounds = legal_bounds();
  for (const auto& gate : spec.gates) {
    const std::string gpath = "gates." + gate.group;
    if (!(gate.probability >= 0.0 && gate.probability <= 1.0)) {
      throw ParameterError(gpath + ".probability must lie in [0, 1]");
    }
    double weight_sum = 0.0;
    for (const auto& m : gate.members) {
      const std::string mpath = gpath + ".members." + m.id;
      if (!(m.probability >= 0.0 && m.probability <= 1.0)) {
        throw ParameterError(mpath + ".probability must lie in [0, 1]");
      }
      weight_sum += m.probability;
      const auto table = bounds.find(m.id);
      for (const auto& [name, r] : m.params) {
        const std::string ppath = mpath + ".params." + name;
        if (!(r.lo <= r.hi)) throw ParameterError(ppath + ": lower bound exceeds upper bound");
        const Bound& b = table->second.at(name);
        const bool low_ok = b.positive ? r.lo > b.min : r.lo >= b.min;
        if (!low_ok || r.hi > b.max) {
          throw ParameterError(ppath + ": outside legal bounds [" + std::to_string(b.min) + ", " +
                               std::to_string(b.max) + "]");
        }
        if (b.integer && (r.lo != std::floor(r.lo) || r.hi != std::floor(r.hi))) {
          throw ParameterError(ppath + ": must be integral");
        }
      }
      if (m.id == "gaussian_blur" || m.id == "motion_blur") {
        const auto& k = m.params.at("kernel");
        const int first_odd = static_cast<int>(k.lo) | 1;
        if (first_odd > static_cast<int>(k.hi)) {
          throw ParameterError(mpath + ".params.kernel: range contains no odd size");
        }
      }
    }
    if (gate.mode == GateMode::one_of && std::abs(weight_sum - 1.0) > 1e-9) {
      throw ParameterError(gpath + ".members: one_of weights must sum to 1");
    }
  }
}

// ---------------------------------------------------------------------------
// Parameter resolution

int draw_int(RngStream& rng, const ParamRange& r) {
  return static_cast<int>(rng.uniform_int(std::llround(r.lo), std::llround(r.hi)));
}

int draw_odd(RngStream& rng, const ParamRange& r) {
  const int lo = static_cast<int>(std::llround(r.lo)) | 1;
  const int hi = static_cast<int>(std::llround(r.hi));
  const int count = (hi - lo) / 2 + 1;
  return lo + 2 * static_cast<int>(rng.uniform_int(0, count - 1));
}

double draw(RngStream& rng, const ParamRange& r) { return rng.uniform(r.lo, r.hi); }

AppliedTransform resolve(const GateSpec& gate, const MemberSpec& m, RngStream& rng,
                         const RngKey& sample_key) {
  AppliedTransform t{gate.group, m.id, json::object(), std::nullopt};
  const auto& p = m.params;
  const auto private_stream = [&] {
    RngKey key = sample_key;
    key.stage_tag = gate.group + "/" + m.id;
    t.rng = key;
  };

  if (m.id == "d4") {
    const auto e = d4_elements()[static_cast<std::size_t>(rng.uniform_int(0, 7))];
    t.params = {{"quarter_turns", e.quarter_turns}, {"flip", e.flip}};
  } else if (m.id == "rotate") {
    t.params = {{"angle", draw(rng, p.at("limit"))}};
  } else if (m.id == "rotate90") {
    t.params = {{"quarter_turns", rng.uniform_int(0, 3)}};
  } else if (m.id == "shift_scale_rotate") {
    const double sx = draw(rng, p.at("shift"));
    const double sy = draw(rng, p.at("shift"));
    const double scale = draw(rng, p.at("scale"));
    const double angle = draw(rng, p.at("angle"));
    t.params = {{"shift_x", sx}, {"shift_y", sy}, {"scale", scale}, {"angle", angle}};
  } else if (m.id == "elastic") {
    t.params = {{"alpha", draw(rng, p.at("alpha"))},
                {"sigma", draw(rng, p.at("sigma"))},
                {"alpha_affine", draw(rng, p.at("alpha_affine"))}};
    private_stream();
  } else if (m.id == "grid_distortion") {
    GridDistortionParams gp{draw_int(rng, p.at("num_steps")), draw(rng, p.at("distort_limit"))};
    const auto steps = draw_grid_steps(gp, rng);
    t.params = {{"x_steps", steps.x}, {"y_steps", steps.y}};
  } else if (m.id == "optical_distortion") {
    const double limit = draw(rng, p.at("distort_limit"));
    t.params = {{"k", rng.uniform(-limit, limit)}};
  } else if (m.id == "color_jitter") {
    const double b = draw(rng, p.at("brightness"));
    const double c = draw(rng, p.at("contrast"));
    const double s = draw(rng, p.at("saturation"));
    const double h = draw(rng, p.at("hue"));
    const auto order = rng.uniform_int(0, 23);
    t.params = {{"brightness", b}, {"contrast", c}, {"saturation", s}, {"hue", h}, {"order", order}};
  } else if (m.id == "hue_saturation_value") {
    const int h = draw_int(rng, p.at("hue"));
    const int s = draw_int(rng, p.at("saturation"));
    const int v = draw_int(rng, p.at("value"));
    t.params = {{"hue", h}, {"saturation", s}, {"value", v}};
  } else if (m.id == "brightness_contrast") {
    const double b = draw(rng, p.at("brightness"));
    const double c = draw(rng, p.at("contrast"));
    t.params = {{"brightness", b}, {"contrast", c}};
  } else if (m.id == "clahe") {
    t.params = {{"clip_limit", draw(rng, p.at("clip_limit"))},
                {"tile_grid", draw_int(rng, p.at("tile_grid"))}};
  } else if (m.id == "rgb_shift") {
    const int r = draw_int(rng, p.at("shift"));
    const int g = draw_int(rng, p.at("shift"));
    const int b = draw_int(rng, p.at("shift"));
    t.params = {{"r", r}, {"g", g}, {"b", b}};
  } else if (m.id == "channel_shuffle") {
    static constexpr ChannelPermutation kPerms[6] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                                     {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    const auto& perm = kPerms[rng.uniform_int(0, 5)];
    t.params = {{"perm", perm}};
  } else if (m.id == "to_gray") {
    // no parameters
  } else if (m.id == "gaussian_blur") {
    t.params = {{"kernel", draw_odd(rng, p.at("kernel"))}};
  } else if (m.id == "defocus") {
    const int radius = draw_int(rng, p.at("radius"));
    const double alias = draw(rng, p.at("alias_blur"));
    t.params = {{"radius", radius}, {"alias_blur", alias}};
  } else if (m.id == "motion_blur") {
    const int kernel = draw_odd(rng, p.at("kernel"));
    const double angle = rng.uniform(0.0, 360.0);
    t.params = {{"kernel", kernel}, {"angle", angle}};
  } else if (m.id == "gauss_noise") {
    t.params = {{"std", draw(rng, p.at("std"))}};
    private_stream();
  } else if (m.id == "iso_noise") {
    const double cs = draw(rng, p.at("color_shift"));
    const double in = draw(rng, p.at("intensity"));
    t.params = {{"color_shift", cs}, {"intensity", in}};
    private_stream();
  } else if (m.id == "multiplicative_noise") {
    t.params = {{"multiplier", draw(rng, p.at("multiplier"))}};
  } else {
    throw ParameterError("unknown transform id: " + m.id);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Resolved-parameter access for replay

template <typename T>
T param(const AppliedTransform& t, const char* name) {
  const auto it = t.params.find(name);
  if (it == t.params.end()) throw ParameterError(t.id + ": missing parameter " + name);
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw ParameterError(t.id + ": malformed parameter " + name);
  }
}

void check_bound(const AppliedTransform& t, const char* name, double v) {
  const auto& table = legal_bounds().at(t.id);
  const Bound& b = table.at(name);
  const bool low_ok = b.positive ? v > b.min : v >= b.min;
  if (!low_ok || v > b.max) {
    throw ParameterError(t.id + "." + name + " = " + std::to_string(v) + " outside legal bounds");
  }
}

RngStream private_rng(const AppliedTransform& t) {
  if (!t.rng) throw ParameterError(t.id + ": audit entry lacks its rng key");
  return RngStream(*t.rng);
}

}  // namespace

const GateSpec* PipelineSpec::find_gate(const std::string& group) const {
  for (const auto& g : gates) {
    if (g.group == group) return &g;
  }
  return nullptr;
}

PipelineSpec build_training_pipeline(const json& overrides) {
  PipelineSpec spec;
  spec.gates = default_gates();
  if (overrides.is_null()) return spec;
  if (!overrides.is_object()) throw ParameterError("pipeline config: expected a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw ParameterError("seed: expected a non-negative integer");
      spec.seed = value.get<std::uint64_t>();
    } else if (key == "gates") {
      const auto merge_one = [&](const std::string& group, const json& gdoc) {
        GateSpec* gate = find_gate(spec.gates, group);
        if (gate == nullptr) throw ParameterError("gates." + group + ": unknown group");
        merge_gate(*gate, gdoc, "gates." + group);
      };
      if (value.is_object()) {
        for (const auto& [group, gdoc] : value.items()) merge_one(group, gdoc);
      } else if (value.is_array()) {
        for (const auto& gdoc : value) {
          if (!gdoc.is_object() || !gdoc.contains("group") || !gdoc["group"].is_string()) {
            throw ParameterError("gates: array entries need a \"group\"");
          }
          merge_one(gdoc["group"].get<std::string>(), gdoc);
        }
      } else {
        throw ParameterError("gates: expected an object or array");
      }
    } else if (key != "final") {
      throw ParameterError(key + ": unknown key");
    }
  }
  validate(spec);
  return spec;
}

PipelineSpec build_validation_pipeline(std::uint64_t seed) { return PipelineSpec{seed, {}}; }

json to_json(const PipelineSpec& spec) {
  json gates = json::array();
  for (const auto& g : spec.gates) {
    json members = json::array();
    for (const auto& m : g.members) {
      json params = json::object();
      for (const auto& [name, r] : m.params) params[name] = range_to_json(r);
      members.push_back({{"id", m.id}, {"probability", m.probability}, {"params", params}});
    }
    gates.push_back({{"group", g.group},
                     {"probability", g.probability},
                     {"mode", mode_name(g.mode)},
                     {"members", members}});
  }
  return {{"seed", spec.seed},
          {"gates", gates},
          {"final",
           {{"center_crop", kCropSize}, {"resize", kModelInputSize}, {"normalize", "imagenet"}}}};
}

json to_json(const AuditRecord& a) {
  json gates = json::array();
  for (const auto& g : a.gates) gates.push_back({{"group", g.group}, {"fired", g.fired}});
  json transforms = json::array();
  for (const auto& t : a.transforms) {
    json entry = {{"group", t.group}, {"id", t.id}, {"params", t.params}};
    if (t.rng) {
      entry["rng"] = {{"seed", t.rng->seed},
                      {"epoch", t.rng->epoch},
                      {"sample_id", t.rng->sample_id},
                      {"stage", t.rng->stage_tag}};
    }
    transforms.push_back(std::move(entry));
  }
  json doc = {{"seed", a.seed},
              {"epoch", a.epoch},
              {"sample_id", a.sample_id},
              {"gates", gates},
              {"transforms", transforms}};
  if (!a.source.empty()) doc["source"] = a.source;
  return doc;
}

AuditRecord audit_from_json(const json& doc) {
  try {
    AuditRecord a;
    a.seed = doc.at("seed").get<std::uint64_t>();
    a.epoch = doc.at("epoch").get<std::uint64_t>();
    a.sample_id = doc.at("sample_id").get<std::uint64_t>();
    if (doc.contains("source")) a.source = doc["source"].get<std::string>();
    if (doc.contains("gates")) {
      for (const auto& g : doc["gates"]) {
        a.gates.push_back({g.at("group").get<std::string>(), g.at("fired").get<bool>()});
      }
    }
    for (const auto& t : doc.at("transforms")) {
      AppliedTransform applied;
      applied.group = t.value("group", "");
      applied.id = t.at("id").get<std::string>();
      applied.params = t.value("params", json::object());
      if (t.contains("rng")) {
        const auto& k = t["rng"];
        applied.rng = RngKey{k.at("seed").get<std::uint64_t>(), k.at("epoch").get<std::uint64_t>(),
                             k.at("sample_id").get<std::uint64_t>(),
                             k.at("stage").get<std::string>()};
      }
      a.transforms.push_back(std::move(applied));
    }
    return a;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed audit record: ") + e.what());
  }
}

Patch apply_transform(const AppliedTransform& t, const Patch& src) {
  const std::string& id = t.id;
  if (id == "d4" || id == "rotate90") {
    const bool flip = id == "d4" ? param<bool>(t, "flip") : false;
    const int turns = param<int>(t, "quarter_turns");
    if (turns < 0 || turns > 3) throw ParameterError(id + ".quarter_turns outside 0..3");
    return d4_apply(src, D4Element{turns, flip});
  }
  if (id == "rotate") return rotate(src, param<double>(t, "angle"));
  if (id == "shift_scale_rotate") {
    return shift_scale_rotate(src,
                              {param<double>(t, "shift_x"), param<double>(t, "shift_y"),
                               param<double>(t, "scale"), param<double>(t, "angle")},
                              kLegalSsr);
  }
  if (id == "elastic") {
    const ElasticParams p{param<double>(t, "alpha"), param<double>(t, "sigma"),
                          param<double>(t, "alpha_affine")};
    check_bound(t, "alpha", p.alpha);
    check_bound(t, "sigma", p.sigma);
    check_bound(t, "alpha_affine", p.alpha_affine);
    auto rng = private_rng(t);
    return elastic(src, p, rng);
  }
  if (id == "grid_distortion") {
    return grid_distortion(
        src, GridSteps{param<std::vector<double>>(t, "x_steps"), param<std::vector<double>>(t, "y_steps")});
  }
  if (id == "optical_distortion") {
    const double k = param<double>(t, "k");
    if (std::abs(k) > legal_bounds().at(id).at("distort_limit").max) {
      throw ParameterError("optical_distortion.k outside legal bounds");
    }
    return optical_distortion(src, k);
  }
  if (id == "color_jitter") {
    return color_jitter(src,
                        {param<double>(t, "brightness"), param<double>(t, "contrast"),
                         param<double>(t, "saturation"), param<double>(t, "hue")},
                        jitter_order(param<int>(t, "order")), kLegalJitter);
  }
  if (id == "hue_saturation_value") {
    return hsv_shift(src,
                     {param<int>(t, "hue"), param<int>(t, "saturation"), param<int>(t, "value")},
                     kLegalHsv);
  }
  if (id == "brightness_contrast") {
    return brightness_contrast(src, param<double>(t, "brightness"), param<double>(t, "contrast"),
                               1.0);
  }
  if (id == "clahe") {
    const double clip = param<double>(t, "clip_limit");
    const int tiles = param<int>(t, "tile_grid");
    check_bound(t, "clip_limit", clip);
    check_bound(t, "tile_grid", tiles);
    return clahe(src, ClaheParams{clip, tiles, tiles});
  }
  if (id == "rgb_shift") {
    return rgb_shift(src, {param<int>(t, "r"), param<int>(t, "g"), param<int>(t, "b")}, 255);
  }
  if (id == "channel_shuffle") return channel_shuffle(src, param<ChannelPermutation>(t, "perm"));
  if (id == "to_gray") return to_grayscale(src);
  if (id == "gaussian_blur") return gaussian_blur(src, param<int>(t, "kernel"));
  if (id == "defocus") {
    const int radius = param<int>(t, "radius");
    const double alias = param<double>(t, "alias_blur");
    check_bound(t, "radius", radius);
    check_bound(t, "alias_blur", alias);
    return defocus(src, radius, alias);
  }
  if (id == "motion_blur") {
    const int kernel = param<int>(t, "kernel");
    check_bound(t, "kernel", kernel);
    return motion_blur(src, kernel, param<double>(t, "angle"));
  }
  if (id == "gauss_noise") {
    const double std = param<double>(t, "std");
    check_bound(t, "std", std);
    auto rng = private_rng(t);
    return gauss_noise(src, std, rng);
  }
  if (id == "iso_noise") {
    const double cs = param<double>(t, "color_shift");
    const double in = param<double>(t, "intensity");
    check_bound(t, "color_shift", cs);
    check_bound(t, "intensity", in);
    auto rng = private_rng(t);
    return iso_noise(src, cs, in, rng);
  }
  if (id == "multiplicative_noise") {
    const double m = param<double>(t, "multiplier");
    check_bound(t, "multiplier", m);
    return multiplicative_noise(src, m);
  }
  throw ParameterError("unknown transform id: " + id);
}

AugmentResult augment(const PipelineSpec& spec, const Patch& src, std::uint64_t epoch,
                      std::uint64_t sample_id) {
  AuditRecord audit;
  audit.seed = spec.seed;
  audit.epoch = epoch;
  audit.sample_id = sample_id;
  const RngKey sample_key{spec.seed, epoch, sample_id, {}};

  Patch current = src;
  for (const auto& gate : spec.gates) {
    auto rng = make_rng(spec.seed, epoch, sample_id, gate.group);
    const bool fired = rng.bernoulli(gate.probability);
    audit.gates.push_back({gate.group, fired});
    if (!fired || gate.members.empty()) continue;

    if (gate.mode == GateMode::one_of) {
      const double u = rng.uniform();
      double acc = 0.0;
      const MemberSpec* chosen = &gate.members.back();
      for (const auto& m : gate.members) {
        acc += m.probability;
        if (u < acc) {
          chosen = &m;
          break;
        }
      }
      auto t = resolve(gate, *chosen, rng, sample_key);
      current = apply_transform(t, current);
      audit.transforms.push_back(std::move(t));
    } else {
      for (const auto& m : gate.members) {
        if (!rng.bernoulli(m.probability)) continue;
        auto t = resolve(gate, m, rng, sample_key);
        current = apply_transform(t, current);
        audit.transforms.push_back(std::move(t));
      }
    }
  }
  return {std::move(current), std::move(audit)};
}

PipelineOutput apply(const PipelineSpec& spec, const Patch& src, std::uint64_t epoch,
                     std::uint64_t sample_id) {
  if (src.width() < kCropSize || src.height() < kCropSize) {
    throw ShapeError("patch " + std::to_string(src.width()) + "x" + std::to_string(src.height()) +
                     " is smaller than the 60x60 crop");
  }
  auto result = augment(spec, src, epoch, sample_id);
  return {final_preprocess(result.augmented), std::move(result.audit)};
}

NormalizedTensor replay(const AuditRecord& audit, const Patch& src) {
  Patch current = src;
  for (const auto& t : audit.transforms) current = apply_transform(t, current);
  return final_preprocess(current);
}

std::vector<PipelineOutput> apply_batch(const PipelineSpec& spec, std::span<const Patch> sources,
                                        std::uint64_t epoch,
                                        std::span<const std::uint64_t> sample_ids,
                                        unsigned workers) {
  if (sources.size() != sample_ids.size()) {
    throw ParameterError("apply_batch needs one sample id per source");
  }
  std::vector<std::optional<PipelineOutput>> slots(sources.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto work = [&] {
    for (std::size_t i = next++; i < sources.size(); i = next++) {
      try {
        slots[i].emplace(apply(spec, sources[i], epoch, sample_ids[i]));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const unsigned n = std::max(1u, workers);
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<PipelineOutput> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace histaug
