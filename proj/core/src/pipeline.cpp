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

#include "synseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "synseg/image_io.hpp"

namespace synseg {
namespace {

template <typename Fn>
auto RunStage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw Error(e.code(), std::string(stage) + ": " + e.what(), stage);
  }
}

// CRF unary probability: P inside the preliminary mask, 0 outside.
ProbabilityMap MaskedProbability(const ProbabilityMap& p, const BinaryMask& mask) {
  ProbabilityMap out = p;
  auto v = out.values.data();
  const auto bits = mask.bits.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!bits[i]) v[i] = 0.0f;
  }
  return out;
}

BinaryMask EmptyMask(const Tile& tile, MaskKind kind) {
  return BinaryMask{Image<std::uint8_t>(tile.width(), tile.height()), kind};
}

}  // namespace

std::string AggregateIdFor(const std::string& wsi_id, const std::string& tile_id,
                           std::uint32_t label) {
  char suffix[16];
  std::snprintf(suffix, sizeof(suffix), "%03u", label);
  return wsi_id + "_" + tile_id + "_" + suffix;
}

int InferGridSide(const Tensor& attention) {
  const auto& shape = attention.shape();
  if (shape.size() != 3 || shape[1] < 2 || shape[1] != shape[2]) {
    throw Error(ErrorCode::kShape, "attention tensor must be [h, N+1, N+1]");
  }
  const std::int64_t n = shape[1] - 1;
  auto g = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (g * g != n) {
    throw Error(ErrorCode::kShape, "patch-token count " + std::to_string(n) +
                                       " is not a square grid");
  }
  return static_cast<int>(g);
}

PipelineResult RunPipeline(const Tile& tile, const AttentionTensor& attention,
                           const PipelineOptions& options, const TileStore* store) {
  PipelineResult result;
  const auto& th = options.thresholds;

  // Stain decomposition -> S_alkaline.
  ProbabilityMap alk_prob{Image<float>(tile.width(), tile.height()), MapKind::kAlkaline};
  RunStage("stain", [&] {
    const OdImage od = RgbToOd(tile);
    std::optional<ConcentrationMaps> conc;
    if (options.fixed_basis) {
      conc = SolveConcentrations(od, *options.fixed_basis,
                                 options.snmf.concentration_lambda,
                                 options.snmf.background_threshold,
                                 options.snmf.max_cd_sweeps);
      result.basis = options.fixed_basis;
    } else {
      try {
        auto fit = SnmfDecompose(od, options.snmf);
        result.basis = fit.basis;
        conc = std::move(fit.concentrations);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientTissue) throw;
      }
    }
    if (conc) {
      alk_prob = AlkalineProbability(*conc, options.alkaline_percentile,
                                     options.concentration_floor);
    }
    return 0;
  });
  BinaryMask alkaline = ThresholdAlkaline(alk_prob);

  // Attention -> P -> S_attention.
  ProbabilityMap att_prob = RunStage("attention", [&] {
    const auto a_cls = ClassAttention(attention);
    return AttentionToMap(a_cls, attention.grid_side, tile.height(), tile.width());
  });
  BinaryMask att_mask = RunStage("attention", [&] {
    return ThresholdAttention(att_prob, options.tau);
  });

  // CRF -> S_refined. When nothing can survive the alkaline overlap test the
  // refinement cannot change the outcome and is skipped.
  BinaryMask refined = EmptyMask(tile, MaskKind::kRefined);
  if (alkaline.count() > 0 && att_mask.count() > 0) {
    refined = RunStage("crf", [&] {
      return RefineMask(tile, MaskedProbability(att_prob, att_mask), options.crf,
                        options.crf_mode);
    });
  }

  BinaryMask combined = EmptyMask(tile, MaskKind::kCombined);
  RunStage("postprocess", [&] {
    combined = CombineMasks(refined, alkaline);
    BinaryMask kept = RemoveSmall(combined, th.t_s);
    InstanceMask inst = LabelComponents(kept);
    inst = AssociateComponents(inst, th.t_d);
    result.instances = FilterFeret(inst, th.t_f);
    return 0;
  });

  if (options.keep_intermediates) {
    result.intermediates = PipelineIntermediates{alk_prob, alkaline, att_prob,
                                                 att_mask, refined, combined};
  }

  const auto stats = ComputeRegionStats(result.instances);
  std::optional<InMemoryTileStore> local;
  if (options.extract_patches && !store) {
    // A lone tile acts as a one-tile slide anchored at its own origin.
    local.emplace(tile.wsi_id, std::max(tile.width(), tile.height()));
    local->Put({0, 0}, tile.pixels);
  }
  for (const auto& s : stats) {
    AggregateRecord r;
    r.aggregate_id = AggregateIdFor(tile.wsi_id, tile.tile_id, s.label);
    r.wsi_id = tile.wsi_id;
    r.tile_id = tile.tile_id;
    r.centroid = {static_cast<double>(tile.origin_x) + s.centroid_x,
                  static_cast<double>(tile.origin_y) + s.centroid_y};
    r.area = s.area;
    r.feret = s.feret;
    r.bbox = {tile.origin_x + s.bbox[0], tile.origin_y + s.bbox[1],
              tile.origin_x + s.bbox[2], tile.origin_y + s.bbox[3]};
    r.component_count = s.component_count;
    r.patch_ref = "patches/" + r.aggregate_id + ".png";
    if (options.extract_patches) {
      result.patches.push_back(RunStage("patches", [&] {
        if (store) {
          return CropPatch(*store, std::llround(r.centroid[0]),
                           std::llround(r.centroid[1]), kPatchSize, r.aggregate_id);
        }
        Patch p = CropPatch(*local, std::llround(s.centroid_x),
                            std::llround(s.centroid_y), kPatchSize, r.aggregate_id);
        p.center_x = std::llround(r.centroid[0]);
        p.center_y = std::llround(r.centroid[1]);
        return p;
      }));
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

SegmentSummary SegmentWsi(const DirectoryTileStore& store,
                          const std::vector<TileScore>& scores,
                          const SegmentOptions& options,
                          const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<TileScore> positive;
  for (auto& s : SelectPositiveTiles(scores, options.tile_cutoff)) {
    if (s.wsi_id == store.wsi_id()) positive.push_back(s);
  }
  fs::create_directories(out_dir / "masks");
  fs::create_directories(out_dir / "patches");

  std::vector<std::vector<AggregateRecord>> per_tile(positive.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= positive.size()) return;
      try {
        const auto& tile_id = positive[i].tile_id;
        const Tile tile = store.LoadTile(ParseTileId(tile_id));
        const Tensor tensor =
            ReadTensor(store.root() / "attention" / (tile_id + ".spt"));
        const auto attention =
            AttentionFromTensor(tensor, InferGridSide(tensor), options.cls_index);
        auto result = RunPipeline(tile, attention, options.pipeline, &store);
        WriteLabelPng(out_dir / "masks" / (tile_id + ".png"), result.instances);
        for (const auto& p : result.patches) {
          WriteRgbPng(out_dir / "patches" / (p.aggregate_id + ".png"), p.pixels);
        }
        per_tile[i] = std::move(result.records);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(positive.size());
      }
    }
  };
  const int n_workers = std::max(1, options.workers);
  std::vector<std::thread> threads;
  for (int t = 1; t < n_workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // Single writer, deterministic order.
  std::vector<AggregateRecord> all;
  for (auto& recs : per_tile) {
    for (auto& r : recs) all.push_back(std::move(r));
  }
  WriteManifest(out_dir / "aggregates.jsonl", all);
  return {positive.size(), all.size()};
}

}  // namespace synseg
