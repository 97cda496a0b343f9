#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "otdet/pipeline.hpp"

namespace py = pybind11;
using namespace otdet;

namespace {

GrayImage gray_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  GrayImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

py::array_t<double> array_from_gray(const GrayImage& img) {
  py::array_t<double> a({img.height, img.width});
  std::copy(img.data.begin(), img.data.end(), a.mutable_data());
  return a;
}

BinaryMask mask_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  BinaryMask mask(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.size(); ++i) mask.bits[i] = a.data()[i] ? 1 : 0;
  return mask;
}

py::array_t<std::uint8_t> array_from_mask(const BinaryMask& mask) {
  py::array_t<std::uint8_t> a({mask.height, mask.width});
  std::copy(mask.bits.begin(), mask.bits.end(), a.mutable_data());
  return a;
}

py::array_t<int> array_from_pixels(const std::vector<Pixel>& px) {
  py::array_t<int> a({static_cast<py::ssize_t>(px.size()), static_cast<py::ssize_t>(2)});
  int* out = a.mutable_data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    out[2 * i] = px[i].row;
    out[2 * i + 1] = px[i].col;
  }
  return a;
}

FeatureSequence sequence_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a (frames, dim) array");
  FeatureSequence seq;
  int t = static_cast<int>(a.shape(0));
  int d = static_cast<int>(a.shape(1));
  seq.frames.assign(t, std::vector<double>(d));
  for (int i = 0; i < t; ++i)
    std::copy(a.data() + static_cast<py::ssize_t>(i) * d,
              a.data() + static_cast<py::ssize_t>(i + 1) * d, seq.frames[i].begin());
  return seq;
}

py::array_t<double> array_from_sequence(const FeatureSequence& seq) {
  py::ssize_t t = static_cast<py::ssize_t>(seq.frames.size());
  py::ssize_t d = t ? static_cast<py::ssize_t>(seq.frames[0].size()) : 0;
  py::array_t<double> a({t, d});
  for (py::ssize_t i = 0; i < t; ++i)
    std::copy(seq.frames[i].begin(), seq.frames[i].end(), a.mutable_data() + i * d);
  return a;
}

py::array_t<double> array_from_polygon(const std::vector<PointXY>& poly) {
  py::array_t<double> a({static_cast<py::ssize_t>(poly.size()), static_cast<py::ssize_t>(2)});
  double* out = a.mutable_data();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    out[2 * i] = poly[i].x;
    out[2 * i + 1] = poly[i].y;
  }
  return a;
}

std::vector<PointXY> polygon_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 2)
    throw std::invalid_argument("expected an (n, 2) array of [x, y] points");
  std::vector<PointXY> poly(a.shape(0));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    poly[i] = {a.data()[2 * i], a.data()[2 * i + 1]};
  return poly;
}

PipelineConfig config_or_default(const std::string& path) {
  if (path.empty()) return {};
  return load_config(path);
}

py::dict region_to_dict(const DetectedRegion& region) {
  py::dict d;
  d["polygon"] = array_from_polygon(region.polygon);
  d["score"] = region.score;
  d["width"] = region.width;
  d["curve"] = py::array_t<double>(5, region.curve.data());
  return d;
}

py::list result_to_list(const DetectionResult& result) {
  py::list out;
  for (const auto& region : result.regions) out.append(region_to_dict(region));
  return out;
}

}  // namespace

PYBIND11_MODULE(_otdet, m) {
  m.doc() = "Oriented and curved text line detection";

  py::class_<SkeletonGraph>(m, "Skeleton")
      .def_property_readonly("pixels",
                             [](const SkeletonGraph& s) { return array_from_pixels(s.pixels); })
      .def_property_readonly(
          "endpoints", [](const SkeletonGraph& s) { return array_from_pixels(s.endpoints); })
      .def_property_readonly(
          "junctions", [](const SkeletonGraph& s) { return array_from_pixels(s.junctions); })
      .def_property_readonly(
          "main_axis", [](const SkeletonGraph& s) { return array_from_pixels(s.main_axis); })
      .def_readonly("length", &SkeletonGraph::length)
      .def("__len__", [](const SkeletonGraph& s) { return s.pixels.size(); })
      .def("__repr__", [](const SkeletonGraph& s) {
        return "<Skeleton pixels=" + std::to_string(s.pixels.size()) +
               " length=" + std::to_string(s.length) + ">";
      });

  m.def("load_image", [](const std::string& path) { return array_from_gray(load_gray(path)); },
        py::arg("path"), "Load a PNG or PGM image as a float64 grayscale array.");
  m.def("save_image",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const std::string& path) { save_png_gray(gray_from_array(a), path); },
        py::arg("image"), py::arg("path"));

  m.def("fourier_log",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           double lowpass_radius, double log_sigma) {
          FilterParams p{lowpass_radius, log_sigma};
          return array_from_gray(fourier_log(gray_from_array(a), p));
        },
        py::arg("image"), py::arg("lowpass_radius") = 0.5, py::arg("log_sigma") = 2.0,
        "Band-limited Laplacian-of-Gaussian response, rescaled to [0, 255].");

  m.def("md_window_length", &md_window_length, py::arg("width"), py::arg("height"),
        py::arg("divisor") = 20, py::arg("floor_px") = 7);

  m.def("md_map",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           int window_length) {
          GrayImage img = gray_from_array(a);
          MDMap md = window_length > 0 ? md_map(img, window_length) : md_map(img);
          GrayImage out(md.width, md.height);
          out.data = md.values;
          return array_from_gray(out);
        },
        py::arg("image"), py::arg("window_length") = 0,
        "Per-pixel max-min over horizontal windows; 0 picks the size rule.");

  m.def("kmeans_2",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
          MDMap md;
          md.width = static_cast<int>(a.shape(1));
          md.height = static_cast<int>(a.shape(0));
          md.values.assign(a.data(), a.data() + a.size());
          ClusterResult res = kmeans_2(md);
          return py::make_tuple(array_from_mask(res.mask), res.center_low, res.center_high);
        },
        py::arg("values"), "Optimal scalar 2-means; returns (mask, low_center, high_center).");

  m.def("morph_open",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a,
           int se_size) { return array_from_mask(morph_open(mask_from_array(a), se_size)); },
        py::arg("mask"), py::arg("se_size") = 3);

  m.def("skeletonize",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
          BinaryMask mask = mask_from_array(a);
          py::list out;
          for (const Component& comp : connected_components(mask)) out.append(thin(comp));
          return out;
        },
        py::arg("mask"), "Thin each 8-connected component to a skeleton.");

  m.def("phog_sequence",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
          PhogParams p;
          return array_from_sequence(phog_sequence(gray_from_array(a), p));
        },
        py::arg("strip"), "Sliding-window histogram-of-gradient features of a 40-row strip.");

  m.def("train_models",
        [](const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>& text,
           const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>& nontext,
           const std::string& model_text, const std::string& model_nontext, int states,
           int mixtures, std::uint64_t seed, int max_iters, bool left_to_right, int jobs) {
          std::vector<FeatureSequence> ts, ns;
          for (const auto& a : text) ts.push_back(sequence_from_array(a));
          for (const auto& a : nontext) ns.push_back(sequence_from_array(a));
          TrainOptions opt;
          opt.states = states;
          opt.mixtures = mixtures;
          opt.seed = seed;
          opt.max_iters = max_iters;
          opt.left_to_right = left_to_right;
          opt.jobs = jobs;
          double total = static_cast<double>(ts.size() + ns.size());
          TrainResult rt = train(ts, opt);
          rt.model.label = PatchLabel::Text;
          rt.model.prior = ts.size() / total;
          TrainResult rn = train(ns, opt);
          rn.model.label = PatchLabel::NonText;
          rn.model.prior = ns.size() / total;
          save_model(rt.model, model_text);
          save_model(rn.model, model_nontext);
          py::dict out;
          out["text_loglik"] = rt.loglik_history;
          out["nontext_loglik"] = rn.loglik_history;
          out["skipped"] = py::make_tuple(rt.skipped_sequences, rn.skipped_sequences);
          return out;
        },
        py::arg("text_sequences"), py::arg("nontext_sequences"), py::arg("model_text"),
        py::arg("model_nontext"), py::arg("states") = 6, py::arg("mixtures") = 32,
        py::arg("seed") = 0, py::arg("max_iters") = 100, py::arg("left_to_right") = true,
        py::arg("jobs") = 1,
        "Train both class models and write them to disk; returns the EM histories.");

  m.def("score_sequence",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& seq,
           const std::string& model_text, const std::string& model_nontext, bool per_frame) {
          ModelPair models{load_model(model_text), load_model(model_nontext)};
          return classify(models, sequence_from_array(seq),
                          per_frame ? ScoreMode::PerFrame : ScoreMode::Raw)
              .score;
        },
        py::arg("sequence"), py::arg("model_text"), py::arg("model_nontext"),
        py::arg("per_frame") = true, "Text posterior of a feature sequence, in [0, 1].");

  m.def("detect",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const std::string& model_text, const std::string& model_nontext,
           const std::string& config) {
          ModelPair models{load_model(model_text), load_model(model_nontext)};
          return result_to_list(detect(gray_from_array(a), models, config_or_default(config)));
        },
        py::arg("image"), py::arg("model_text"), py::arg("model_nontext"),
        py::arg("config") = "",
        "Full detection; returns a list of region dicts (polygon, score, width, curve).");

  m.def("detect_without_verification",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const std::string& config) {
          return result_to_list(
              detect_without_verification(gray_from_array(a), config_or_default(config)));
        },
        py::arg("image"), py::arg("config") = "",
        "Candidate pipeline with every region accepted (no models).");

  m.def("evaluate",
        [](const std::vector<py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>>&
               det_masks,
           const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>&
               gt_polygons,
           int width, int height, double min_overlap, double miss_fraction) {
          std::vector<BinaryMask> masks;
          for (const auto& a : det_masks) masks.push_back(mask_from_array(a));
          GroundTruth gt;
          for (const auto& a : gt_polygons) gt.regions.push_back({polygon_from_array(a), {}});
          MatchParams p{min_overlap, miss_fraction};
          EvalCounts counts = match_blocks(masks, gt, width, height, p);
          EvalReport rep = metrics(counts);
          py::dict out;
          out["tdb"] = counts.tdb;
          out["fdb"] = counts.fdb;
          out["mdb"] = counts.mdb;
          out["atb"] = counts.atb;
          out["recall"] = rep.recall;
          out["precision"] = rep.precision;
          out["f_measure"] = rep.f_measure;
          return out;
        },
        py::arg("detection_masks"), py::arg("gt_polygons"), py::arg("width"), py::arg("height"),
        py::arg("min_overlap") = 0.10, py::arg("miss_fraction") = 0.20,
        "Block-level match counts and recall/precision/F for one image.");
}
