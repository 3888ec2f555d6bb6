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

// synseg command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "synseg/annotation.hpp"
#include "synseg/attention.hpp"
#include "synseg/config.hpp"
#include "synseg/crf.hpp"
#include "synseg/csv.hpp"
#include "synseg/error.hpp"
#include "synseg/image_io.hpp"
#include "synseg/metrics.hpp"
#include "synseg/pipeline.hpp"
#include "synseg/retrieval.hpp"
#include "synseg/server.hpp"
#include "synseg/spt.hpp"
#include "synseg/stain.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace synseg;

namespace {

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

Tile LoadTile(const fs::path& path) {
  Tile t;
  t.pixels = ReadRgbImage(path);
  t.tile_id = path.stem().string();
  return t;
}

// --- stain-decompose ------------------------------------------------------

struct StainArgs {
  std::string tile, out_basis, out_conc, out_mask, basis;
  SnmfOptions snmf;
  double percentile = kDefaultAlkalinePercentile;
  double floor = kDefaultConcentrationFloor;
};

int RunStain(const StainArgs& a) {
  const Tile tile = LoadTile(a.tile);
  const OdImage od = RgbToOd(tile);
  StainBasis basis;
  ConcentrationMaps conc;
  if (!a.basis.empty()) {
    basis = StainBasisFromJson(csv::ReadFile(a.basis));
    conc = SolveConcentrations(od, basis, a.snmf.concentration_lambda,
                               a.snmf.background_threshold, a.snmf.max_cd_sweeps);
  } else {
    auto r = SnmfDecompose(od, a.snmf);
    std::fprintf(stderr, "snmf: %d iterations, %s, %zu foreground pixels\n", r.iterations,
                 r.converged ? "converged" : "not converged", r.foreground_pixels);
    basis = r.basis;
    conc = std::move(r.concentrations);
  }
  if (!a.out_basis.empty()) WriteText(a.out_basis, StainBasisToJson(basis) + "\n");
  if (!a.out_conc.empty()) {
    WriteTensor(fs::path(a.out_conc),
                Tensor::FromF32({conc.h.height(), conc.h.width(), 3}, conc.h.data()));
  }
  const BinaryMask mask = ThresholdAlkaline(AlkalineProbability(conc, a.percentile, a.floor));
  if (!a.out_mask.empty()) WriteMaskPng(a.out_mask, mask);
  std::printf("alkaline pixels: %zu\n", mask.count());
  return 0;
}

// --- attention-map --------------------------------------------------------

struct AttentionArgs {
  std::string attn, out, out_prob;
  int grid = 0;
  int cls = 0;
  int size = kPipelineTileSize;
  double tau = kDefaultTau;
};

int RunAttention(const AttentionArgs& a) {
  const Tensor t = ReadTensor(fs::path(a.attn));
  const int g = a.grid > 0 ? a.grid : InferGridSide(t);
  const auto att = AttentionFromTensor(t, g, a.cls);
  ValidateAttention(att);
  const auto p = AttentionToMap(ClassAttention(att), g, a.size, a.size);
  const auto mask = ThresholdAttention(p, a.tau);
  WriteMaskPng(a.out, mask);
  if (!a.out_prob.empty()) {
    WriteTensor(fs::path(a.out_prob),
                Tensor::FromF32({p.values.height(), p.values.width()}, p.values.data()));
  }
  std::printf("attention pixels: %zu\n", mask.count());
  return 0;
}

// --- crf-refine -----------------------------------------------------------

struct CrfArgs {
  std::string tile, prob, params, mode = "fast", out;
};

int RunCrf(const CrfArgs& a) {
  const Tile tile = LoadTile(a.tile);
  const Tensor t = ReadTensor(fs::path(a.prob));
  if (t.shape().size() != 2 || t.shape()[0] != tile.pixels.height() ||
      t.shape()[1] != tile.pixels.width()) {
    throw Error(ErrorCode::kShape, "probability map must be [H, W] matching the tile");
  }
  ProbabilityMap p;
  p.values = Image<float>(tile.pixels.width(), tile.pixels.height(), 1);
  std::copy(t.f32().begin(), t.f32().end(), p.values.data().begin());
  const CrfParams params = a.params.empty() ? CrfParams{} : CrfParamsFromJson(csv::ReadFile(a.params));
  const auto mask = RefineMask(tile, p, params, a.mode == "exact" ? CrfMode::kExact : CrfMode::kFast);
  WriteMaskPng(a.out, mask);
  std::printf("foreground pixels: %zu\n", mask.count());
  return 0;
}

// --- segment --------------------------------------------------------------

struct SegmentArgs {
  std::string wsi, scores, thresholds, out, crf_params, basis;
  int workers = 1;
  double cutoff = kDefaultTileCutoff;
  std::string mode = "fast";
};

int RunSegment(const SegmentArgs& a) {
  DirectoryTileStore store(a.wsi);
  SegmentOptions opt;
  opt.workers = a.workers;
  opt.tile_cutoff = a.cutoff;
  if (!a.thresholds.empty()) opt.pipeline.thresholds = ThresholdsFromJson(a.thresholds);
  if (!a.crf_params.empty()) opt.pipeline.crf = CrfParamsFromJson(csv::ReadFile(a.crf_params));
  if (!a.basis.empty()) opt.pipeline.fixed_basis = StainBasisFromJson(csv::ReadFile(a.basis));
  opt.pipeline.crf_mode = a.mode == "exact" ? CrfMode::kExact : CrfMode::kFast;
  const auto summary = SegmentWsi(store, ReadTileScores(a.scores), opt, a.out);
  std::printf("tiles: %zu aggregates: %zu\n", summary.tiles_processed, summary.aggregates);
  return 0;
}

// --- index ----------------------------------------------------------------

struct IndexArgs {
  std::string emb, ids, out, idx, id, metric = "cosine";
  int k = kDefaultNeighbors;
  double cutoff = kDefaultDuplicateCutoff;
  bool json = false;
};

int RunIndexBuild(const IndexArgs& a) {
  const auto metric = ParseMetric(a.metric);
  if (!metric) throw Error(ErrorCode::kBadRequest, "metric must be cosine or euclidean");
  const auto index = BuildIndex(a.emb, a.ids, *metric);
  SaveIndex(a.out, index);
  std::printf("indexed %zu vectors of dim %zu\n", index.size(), index.dim());
  return 0;
}

int RunIndexQuery(const IndexArgs& a) {
  const auto index = LoadIndex(a.idx);
  const auto result = index.KnnById(a.id, a.k);
  if (a.json) {
    ordered_json out = ordered_json::array();
    for (const auto& n : result) out.push_back({{"rank", n.rank}, {"id", n.id}, {"score", n.score}});
    std::cout << out.dump(2) << '\n';
  } else {
    for (const auto& n : result) std::printf("%d\t%s\t%.6f\n", n.rank, n.id.c_str(), n.score);
  }
  return 0;
}

int RunIndexDuplicates(const IndexArgs& a) {
  for (const auto& d : LoadIndex(a.idx).FlagDuplicates(a.cutoff)) {
    std::printf("%s\t%s\t%.6f\n", d.first.c_str(), d.second.c_str(), d.similarity);
  }
  return 0;
}

// --- serve / export -------------------------------------------------------

struct ServeArgs {
  std::string manifest, index, patches, log, host = "127.0.0.1";
  int port = 8080;
};

int RunServe(const ServeArgs& a) {
  std::shared_ptr<const EmbeddingIndex> index;
  if (!a.index.empty()) index = std::make_shared<EmbeddingIndex>(LoadIndex(a.index));
  AnnotationService service(ReadManifest(a.manifest), index, a.patches, a.log);
  AnnotationServer server(service);
  std::fprintf(stderr, "listening on http://%s:%d\n", a.host.c_str(), a.port);
  if (!server.Listen(a.host, a.port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + a.host + ":" + std::to_string(a.port));
  }
  return 0;
}

struct ExportArgs {
  std::string manifest, log, format = "jsonl", annotator, out;
  std::uint64_t seed = 42;
  double val_fraction = kDefaultValFraction;
};

int RunExport(const ExportArgs& a) {
  AnnotationService service(ReadManifest(a.manifest), nullptr, {}, {});
  ExportOptions opt;
  const auto format = ParseExportFormat(a.format);
  if (!format) throw Error(ErrorCode::kBadRequest, "format must be jsonl or csv");
  opt.format = *format;
  opt.seed = a.seed;
  opt.val_fraction = a.val_fraction;
  if (!a.annotator.empty()) opt.annotator = a.annotator;
  std::map<std::string, std::string> paths;
  for (const auto& r : ReadManifest(a.manifest)) paths[r.aggregate_id] = r.patch_ref;
  auto labels = ActiveLabels(ReadAnnotationLog(a.log), opt.annotator);
  std::erase_if(labels, [&](const auto& kv) { return !paths.contains(kv.first); });
  const std::string text = RenderExport(SplitDataset(labels, paths, opt.seed, opt.val_fraction), opt);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    WriteText(a.out, text);
  }
  return 0;
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string pairs, manifest, pred, gold, annotator;
  bool pooled = false;
  bool json = false;
};

int RunEvalCounts(const EvalArgs& a) {
  const auto rows = ParseCountRows(csv::ReadFile(a.pairs));
  const double d = RelativeCountDifference(rows, a.pooled);
  if (a.json) {
    std::cout << ordered_json{{"tiles", rows.size()}, {"pooled", a.pooled},
                              {"relative_difference", d}}.dump() << '\n';
  } else {
    std::printf("tiles: %zu\nrelative difference (%s): %.6f\n", rows.size(),
                a.pooled ? "pooled" : "per-tile mean", d);
  }
  return 0;
}

int RunEvalRatings(const EvalArgs& a) {
  const auto t = TallyRatings(ReadManifest(a.manifest));
  static constexpr const char* kNames[] = {"Good", "Medium", "Bad"};
  if (a.json) {
    ordered_json out;
    out["total"] = t.total;
    for (int i = 0; i < 3; ++i) {
      out[kNames[i]] = {{"count", t.counts[static_cast<std::size_t>(i)]},
                        {"fraction", t.fractions[static_cast<std::size_t>(i)]}};
    }
    std::cout << out.dump(2) << '\n';
  } else {
    for (int i = 0; i < 3; ++i) {
      std::printf("%-7s %5zu  %.3f\n", kNames[i], t.counts[static_cast<std::size_t>(i)],
                  t.fractions[static_cast<std::size_t>(i)]);
    }
    std::printf("total   %5zu\n", t.total);
  }
  return 0;
}

int RunEvalClassify(const EvalArgs& a) {
  std::optional<std::string> annotator;
  if (!a.annotator.empty()) annotator = a.annotator;
  const auto gold = ActiveLabels(ReadAnnotationLog(a.gold), annotator);
  const auto report = Classify(ParsePredictions(csv::ReadFile(a.pred)), gold);
  std::cout << (a.json ? ReportToJson(report) + "\n" : ReportToText(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synseg: alpha-synuclein aggregate segmentation and annotation tools"};
  app.require_subcommand(1);
  int rc = 0;

  StainArgs stain;
  auto* sd = app.add_subcommand("stain-decompose", "Fit a stain basis and alkaline mask for one tile");
  sd->add_option("--tile", stain.tile, "RGB tile (PNG or TIFF)")->required()->check(CLI::ExistingFile);
  sd->add_option("--lambda", stain.snmf.lambda, "Sparsity weight for the basis fit");
  sd->add_option("--conc-lambda", stain.snmf.concentration_lambda, "Sparsity weight for final concentrations");
  sd->add_option("--seed", stain.snmf.seed, "Initialization seed");
  sd->add_option("--max-iters", stain.snmf.max_iters);
  sd->add_option("--percentile", stain.percentile, "Normalization percentile");
  sd->add_option("--floor", stain.floor, "Minimum normalizer");
  sd->add_option("--basis", stain.basis, "Reuse a fixed basis (JSON) instead of fitting")->check(CLI::ExistingFile);
  sd->add_option("--out-basis", stain.out_basis, "Basis JSON output");
  sd->add_option("--out-conc", stain.out_conc, "Concentrations SPT [H, W, 3]");
  sd->add_option("--out-mask", stain.out_mask, "Alkaline mask PNG");
  sd->callback([&] { rc = RunStain(stain); });

  AttentionArgs att;
  auto* am = app.add_subcommand("attention-map", "Class-token attention to a thresholded mask");
  am->add_option("--attn", att.attn, "Attention SPT [heads, N+1, N+1]")->required()->check(CLI::ExistingFile);
  am->add_option("--grid", att.grid, "Patch grid side (0 infers from the tensor)");
  am->add_option("--cls", att.cls, "Class token index");
  am->add_option("--tau", att.tau, "Attention threshold");
  am->add_option("--size", att.size, "Output side in pixels");
  am->add_option("--out", att.out, "Mask PNG")->required();
  am->add_option("--out-prob", att.out_prob, "Probability SPT [H, W]");
  am->callback([&] { rc = RunAttention(att); });

  CrfArgs crf;
  auto* cr = app.add_subcommand("crf-refine", "Dense CRF refinement of a probability map");
  cr->add_option("--tile", crf.tile)->required()->check(CLI::ExistingFile);
  cr->add_option("--prob", crf.prob, "Foreground probability SPT [H, W]")->required()->check(CLI::ExistingFile);
  cr->add_option("--params", crf.params, "CRF parameter JSON")->check(CLI::ExistingFile);
  cr->add_option("--mode", crf.mode)->check(CLI::IsMember({"exact", "fast"}));
  cr->add_option("--out", crf.out, "Mask PNG")->required();
  cr->callback([&] { rc = RunCrf(crf); });

  SegmentArgs seg;
  auto* sg = app.add_subcommand("segment", "Segment every positive tile of a slide");
  sg->add_option("--wsi", seg.wsi, "Slide directory (tiles/, attention/, wsi.json)")->required()->check(CLI::ExistingDirectory);
  sg->add_option("--scores", seg.scores, "Tile scores CSV wsi_id,tile_id,score")->required()->check(CLI::ExistingFile);
  sg->add_option("--thresholds", seg.thresholds, R"(JSON such as {"t_s":100,"t_d":20,"t_f":33})");
  sg->add_option("--cutoff", seg.cutoff, "Tile score cutoff");
  sg->add_option("--crf-params", seg.crf_params)->check(CLI::ExistingFile);
  sg->add_option("--crf-mode", seg.mode)->check(CLI::IsMember({"exact", "fast"}));
  sg->add_option("--basis", seg.basis, "Fixed stain basis JSON for the whole slide")->check(CLI::ExistingFile);
  sg->add_option("--workers", seg.workers)->check(CLI::PositiveNumber);
  sg->add_option("--out", seg.out, "Output directory")->required();
  sg->callback([&] { rc = RunSegment(seg); });

  IndexArgs idx;
  auto* ix = app.add_subcommand("index", "Embedding index");
  ix->require_subcommand(1);
  auto* ib = ix->add_subcommand("build", "Build an index from embeddings and ids");
  ib->add_option("--emb", idx.emb, "Embeddings SPT [M, D]")->required()->check(CLI::ExistingFile);
  ib->add_option("--ids", idx.ids, "One aggregate id per line")->required()->check(CLI::ExistingFile);
  ib->add_option("--metric", idx.metric)->check(CLI::IsMember({"cosine", "euclidean"}));
  ib->add_option("--out", idx.out, "Index path")->required();
  ib->callback([&] { rc = RunIndexBuild(idx); });
  auto* iq = ix->add_subcommand("query", "Nearest neighbours of a stored aggregate");
  iq->add_option("--idx", idx.idx)->required();
  iq->add_option("--id", idx.id)->required();
  iq->add_option("--k", idx.k)->check(CLI::PositiveNumber);
  iq->add_flag("--json", idx.json);
  iq->callback([&] { rc = RunIndexQuery(idx); });
  auto* idup = ix->add_subcommand("duplicates", "List near-identical pairs for review");
  idup->add_option("--idx", idx.idx)->required();
  idup->add_option("--cutoff", idx.cutoff);
  idup->callback([&] { rc = RunIndexDuplicates(idx); });

  ServeArgs srv;
  auto* sv = app.add_subcommand("serve", "Run the annotation HTTP service");
  sv->add_option("--manifest", srv.manifest)->required()->check(CLI::ExistingFile);
  sv->add_option("--index", srv.index);
  sv->add_option("--patches", srv.patches)->required();
  sv->add_option("--port", srv.port);
  sv->add_option("--host", srv.host);
  sv->add_option("--log", srv.log, "Annotation log (JSONL, append-only)")->required();
  sv->callback([&] { rc = RunServe(srv); });

  ExportArgs exp;
  auto* ex = app.add_subcommand("export", "Export labelled aggregates with a train/val split");
  ex->add_option("--manifest", exp.manifest)->required()->check(CLI::ExistingFile);
  ex->add_option("--log", exp.log)->required()->check(CLI::ExistingFile);
  ex->add_option("--format", exp.format)->check(CLI::IsMember({"jsonl", "csv"}));
  ex->add_option("--seed", exp.seed);
  ex->add_option("--val-fraction", exp.val_fraction);
  ex->add_option("--annotator", exp.annotator);
  ex->add_option("--out", exp.out);
  ex->callback([&] { rc = RunExport(exp); });

  EvalArgs ev;
  auto* evc = app.add_subcommand("eval", "Evaluation metrics");
  evc->require_subcommand(1);
  auto* ec = evc->add_subcommand("counts", "Relative count difference");
  ec->add_option("--pairs", ev.pairs, "CSV tile_id,manual_count,auto_count")->required()->check(CLI::ExistingFile);
  ec->add_flag("--pooled", ev.pooled, "Use pooled totals instead of the per-tile mean");
  ec->add_flag("--json", ev.json);
  ec->callback([&] { rc = RunEvalCounts(ev); });
  auto* er = evc->add_subcommand("ratings", "Mask rating fractions");
  er->add_option("--manifest", ev.manifest)->required()->check(CLI::ExistingFile);
  er->add_flag("--json", ev.json);
  er->callback([&] { rc = RunEvalRatings(ev); });
  auto* ecl = evc->add_subcommand("classify", "Confusion matrix and balanced accuracy");
  ecl->add_option("--pred", ev.pred, "CSV aggregate_id,predicted_label")->required()->check(CLI::ExistingFile);
  ecl->add_option("--gold", ev.gold, "Annotation log")->required()->check(CLI::ExistingFile);
  ecl->add_option("--annotator", ev.annotator);
  ecl->add_flag("--json", ev.json);
  ecl->callback([&] { rc = RunEvalClassify(ev); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]%s%s: %s\n", std::string(ErrorCodeName(e.code())).c_str(),
                 e.stage().empty() ? "" : " in ", e.stage().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
