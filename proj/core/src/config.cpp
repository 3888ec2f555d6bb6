// Copyright 2026 The synseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "synseg/config.hpp"

#include <map>

#include "json.hpp"
#include "synseg/error.hpp"

namespace synseg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json ParseObject(std::string_view text, const char* what) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kFormat, std::string(what) + " must be an object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad ") + what + ": " + e.what());
  }
}

// Reads numeric fields named in `fields` from `j`, rejecting anything else.
void ReadNumbers(const json& j, const std::map<std::string, double*>& fields,
                 const std::map<std::string, int*>& ints, const char* what) {
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) {
      throw Error(ErrorCode::kFormat, std::string(what) + "." + key + " must be a number");
    }
    if (auto it = fields.find(key); it != fields.end()) {
      *it->second = value.get<double>();
    } else if (auto jt = ints.find(key); jt != ints.end() && value.is_number_integer()) {
      *jt->second = value.get<int>();
    } else {
      throw Error(ErrorCode::kFormat, std::string("unexpected ") + what + " key " + key);
    }
  }
}

}  // namespace

std::string StainBasisToJson(const StainBasis& basis) {
  ordered_json j;
  j["roles"] = kStainRoleNames;
  ordered_json vectors = ordered_json::array();
  for (int c = 0; c < 3; ++c) {
    vectors.push_back({basis.w(0, c), basis.w(1, c), basis.w(2, c)});
  }
  j["vectors"] = vectors;
  return j.dump(2);
}

StainBasis StainBasisFromJson(std::string_view text) {
  const json j = ParseObject(text, "stain basis");
  try {
    const auto roles = j.at("roles").get<std::vector<std::string>>();
    const auto vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
    if (roles.size() != 3 || vectors.size() != 3) {
      throw Error(ErrorCode::kFormat, "stain basis needs three roles and three vectors");
    }
    StainBasis b;
    for (int c = 0; c < 3; ++c) {
      if (roles[static_cast<std::size_t>(c)] != kStainRoleNames[static_cast<std::size_t>(c)]) {
        throw Error(ErrorCode::kFormat, "stain basis role " + std::to_string(c) +
                                            " must be " +
                                            std::string(kStainRoleNames[static_cast<std::size_t>(c)]));
      }
      const auto& v = vectors[static_cast<std::size_t>(c)];
      if (v.size() != 3) throw Error(ErrorCode::kFormat, "stain vectors must have 3 entries");
      for (int r = 0; r < 3; ++r) b.w(r, c) = v[static_cast<std::size_t>(r)];
    }
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad stain basis: ") + e.what());
  }
}

std::string CrfParamsToJson(const CrfParams& p) {
  ordered_json j;
  j["w_bilateral"] = p.w_bilateral;
  j["w_spatial"] = p.w_spatial;
  j["theta_alpha"] = p.theta_alpha;
  j["theta_beta"] = p.theta_beta;
  j["theta_gamma"] = p.theta_gamma;
  j["iterations"] = p.iterations;
  j["unary_eps"] = p.unary_eps;
  return j.dump();
}

CrfParams CrfParamsFromJson(std::string_view text) {
  CrfParams p;
  ReadNumbers(ParseObject(text, "crf params"),
              {{"w_bilateral", &p.w_bilateral},
               {"w_spatial", &p.w_spatial},
               {"theta_alpha", &p.theta_alpha},
               {"theta_beta", &p.theta_beta},
               {"theta_gamma", &p.theta_gamma},
               {"unary_eps", &p.unary_eps}},
              {{"iterations", &p.iterations}}, "crf params");
  ValidateCrfParams(p);
  return p;
}

std::string ThresholdsToJson(const PipelineThresholds& t) {
  ordered_json j;
  j["t_s"] = t.t_s;
  j["t_d"] = t.t_d;
  j["t_f"] = t.t_f;
  return j.dump();
}

PipelineThresholds ThresholdsFromJson(std::string_view text) {
  PipelineThresholds t;
  ReadNumbers(ParseObject(text, "thresholds"),
              {{"t_s", &t.t_s}, {"t_d", &t.t_d}, {"t_f", &t.t_f}}, {}, "thresholds");
  if (t.t_s < 0 || t.t_d < 0 || t.t_f < 0) {
    throw Error(ErrorCode::kFormat, "thresholds must be nonnegative");
  }
  return t;
}

}  // namespace synseg
