#include "ifl/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ifl/error.hpp"

namespace ifl {
namespace {

void require_data(const InteractionTensor& omega, const PredictionMatrix& preds) {
  preds.validate();
  if (preds.data() != omega.data) {
    throw ValidationError("predictions cover " + std::to_string(preds.data()) + " data, tensor has " +
                          std::to_string(omega.data));
  }
  if (preds.models() != omega.models) {
    throw ValidationError("predictions cover " + std::to_string(preds.models()) +
                          " models, tensor has " + std::to_string(omega.models));
  }
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string single_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

void PredictionMatrix::validate() const {
  if (num_classes < 1) throw ValidationError("num_classes must be positive");
  auto check = [&](int label) {
    if (label < 0 || label >= num_classes) {
      throw ValidationError("label " + std::to_string(label) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
  };
  for (const int l : true_labels) check(l);
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    if (predictions[m].size() != true_labels.size()) {
      throw ValidationError("prediction row " + std::to_string(m) + " has " +
                            std::to_string(predictions[m].size()) + " entries, expected " +
                            std::to_string(true_labels.size()));
    }
    for (const int l : predictions[m]) check(l);
  }
}

std::vector<FeatureCount> feature_frequency(const InteractionTensor& omega) {
  const BinaryMatrix df = data_features(omega);
  std::vector<FeatureCount> out(omega.features);
  for (std::uint32_t t = 0; t < omega.features; ++t) out[t].feature = t;
  for (std::size_t n = 0; n < df.rows(); ++n) {
    for (std::uint32_t t = 0; t < omega.features; ++t) out[t].data_count += df(n, t);
  }
  std::stable_sort(out.begin(), out.end(), [](const FeatureCount& a, const FeatureCount& b) {
    return a.data_count > b.data_count;
  });
  return out;
}

std::vector<double> ensemble_confidence(const PredictionMatrix& preds) {
  preds.validate();
  if (preds.models() == 0) throw ValidationError("confidence needs at least one model");
  std::vector<double> out(preds.data(), 0.0);
  for (std::size_t n = 0; n < preds.data(); ++n) {
    std::size_t correct = 0;
    for (const auto& row : preds.predictions) correct += row[n] == preds.true_labels[n];
    out[n] = static_cast<double>(correct) / static_cast<double>(preds.models());
  }
  return out;
}

std::vector<DatumRecord> confidence_feature_table(const InteractionTensor& omega,
                                                  const PredictionMatrix& preds) {
  require_data(omega, preds);
  const auto conf = ensemble_confidence(preds);
  const BinaryMatrix df = data_features(omega);
  std::vector<DatumRecord> out(omega.data);
  for (std::uint32_t n = 0; n < omega.data; ++n) {
    out[n].datum = n;
    out[n].confidence = conf[n];
    out[n].n_features = static_cast<std::uint32_t>(df.row_set(n).size());
  }
  return out;
}

SplitDensity split_feature_density(const InteractionTensor& omega, const PredictionMatrix& preds,
                                   Warnings* warnings) {
  require_data(omega, preds);
  const auto conf = ensemble_confidence(preds);
  const BinaryMatrix df = data_features(omega);
  std::vector<double> high(omega.features, 0.0);
  std::vector<double> low(omega.features, 0.0);
  SplitDensity out;
  for (std::size_t n = 0; n < df.rows(); ++n) {
    const bool confident = conf[n] == 1.0;
    (confident ? out.high_size : out.low_size) += 1;
    auto& target = confident ? high : low;
    for (std::uint32_t t = 0; t < omega.features; ++t) target[t] += df(n, t);
  }
  auto normalize = [&](std::vector<double>& v, const char* name) {
    double total = 0.0;
    for (const double x : v) total += x;
    if (total == 0.0) {
      std::fill(v.begin(), v.end(), 0.0);
      if (warnings) warnings->push_back(std::string(name) + " group has no feature occurrences; density set to 0");
      return;
    }
    for (double& x : v) x /= total;
  };
  normalize(high, "high-confidence");
  normalize(low, "low-confidence");
  for (const auto& fc : feature_frequency(omega)) {
    out.features.push_back(fc.feature);
    out.high.push_back(high[fc.feature]);
    out.low.push_back(low[fc.feature]);
  }
  return out;
}

DataModelCounts data_model_counts(const InteractionTensor& omega, Warnings* warnings) {
  const BinaryMatrix df = data_features(omega);
  const BinaryMatrix mf = model_features(omega);
  DataModelCounts out;
  out.records.resize(omega.features);
  for (std::uint32_t t = 0; t < omega.features; ++t) {
    auto& r = out.records[t];
    r.feature = t;
    for (std::size_t n = 0; n < df.rows(); ++n) r.data_count += df(n, t);
    for (std::size_t m = 0; m < mf.rows(); ++m) r.model_count += mf(m, t);
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : out.records) {
    if (r.data_count == 0) continue;
    xs.push_back(r.data_count);
    ys.push_back(r.model_count);
  }
  auto undefined = [&](const std::string& why) {
    if (warnings) warnings->push_back("data/model count correlation undefined: " + why);
  };
  if (xs.size() < 2) {
    undefined("fewer than two features present");
    return out;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    undefined("no variation in counts");
    return out;
  }
  out.correlation = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return out;
}

MistakeMode parse_mistake_mode(const std::string& text) {
  if (text == "identical") return MistakeMode::Identical;
  if (text == "joint") return MistakeMode::Joint;
  throw ValidationError("mistake mode must be 'identical' or 'joint', got '" + text + "'");
}

std::vector<PairRecord> shared_error_table(const BinaryMatrix& model_features,
                                           const PredictionMatrix& preds, MistakeMode mode,
                                           Warnings* warnings) {
  preds.validate();
  const std::size_t m = preds.models();
  if (m < 2) throw ValidationError("shared errors need at least two models");
  if (model_features.rows() != m) {
    throw ValidationError("model feature matrix has " + std::to_string(model_features.rows()) +
                          " rows, expected " + std::to_string(m));
  }
  std::vector<std::vector<std::uint32_t>> errors(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t n = 0; n < preds.data(); ++n) {
      if (preds.predictions[i][n] != preds.true_labels[n]) errors[i].push_back(static_cast<std::uint32_t>(n));
    }
  }
  std::vector<PairRecord> out;
  out.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      PairRecord r;
      r.model_i = static_cast<std::uint32_t>(i);
      r.model_j = static_cast<std::uint32_t>(j);
      for (std::size_t t = 0; t < model_features.cols(); ++t) {
        r.shared_features += model_features(i, t) && model_features(j, t);
      }
      std::size_t shared = 0;
      std::size_t a = 0;
      std::size_t b = 0;
      while (a < errors[i].size() && b < errors[j].size()) {
        if (errors[i][a] < errors[j][b]) {
          ++a;
        } else if (errors[j][b] < errors[i][a]) {
          ++b;
        } else {
          const auto n = errors[i][a];
          shared += mode == MistakeMode::Joint || preds.predictions[i][n] == preds.predictions[j][n];
          ++a;
          ++b;
        }
      }
      const std::size_t total = errors[i].size() + errors[j].size();
      if (total == 0) {
        r.flagged = true;
        if (warnings && i < j) {
          warnings->push_back("models " + std::to_string(i) + " and " + std::to_string(j) +
                              " make no mistakes; shared_error set to 0");
        }
      } else {
        r.shared_error = 2.0 * static_cast<double>(shared) / static_cast<double>(total);
      }
      out.push_back(r);
    }
  }
  return out;
}

double feature_similarity(std::vector<std::uint32_t> a, std::vector<std::uint32_t> b,
                          Warnings* warnings) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (a.empty() && b.empty()) {
    if (warnings) warnings->push_back("similarity of two empty feature sets set to 0");
    return 0.0;
  }
  std::vector<std::uint32_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return 2.0 * static_cast<double>(both.size()) / static_cast<double>(a.size() + b.size());
}

std::vector<Neighbor> nearest_neighbors(const BinaryMatrix& data_features, std::size_t index,
                                        std::size_t top_k) {
  if (index >= data_features.rows()) {
    throw ValidationError("index " + std::to_string(index) + " out of range [0, " +
                          std::to_string(data_features.rows()) + ")");
  }
  if (top_k < 1) throw ValidationError("top_k must be at least 1");
  const auto query = data_features.row_set(index);
  std::vector<Neighbor> all;
  for (std::size_t n = 0; n < data_features.rows(); ++n) {
    if (n == index) continue;
    all.push_back({static_cast<std::uint32_t>(n), feature_similarity(query, data_features.row_set(n))});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
    return x.similarity > y.similarity;
  });
  if (all.size() > top_k) all.resize(top_k);
  return all;
}

std::vector<std::vector<std::uint32_t>> per_class_frequency(const BinaryMatrix& data_features,
                                                            const std::vector<int>& true_labels,
                                                            int num_classes) {
  if (num_classes < 1) throw ValidationError("num_classes must be positive");
  if (true_labels.size() != data_features.rows()) {
    throw ValidationError("labels cover " + std::to_string(true_labels.size()) + " data, expected " +
                          std::to_string(data_features.rows()));
  }
  std::vector<std::vector<std::uint32_t>> out(
      data_features.cols(), std::vector<std::uint32_t>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t n = 0; n < data_features.rows(); ++n) {
    const int c = true_labels[n];
    if (c < 0 || c >= num_classes) {
      throw ValidationError("label " + std::to_string(c) + " outside [0, " + std::to_string(num_classes) + ")");
    }
    for (std::size_t t = 0; t < data_features.cols(); ++t) {
      out[t][static_cast<std::size_t>(c)] += data_features(n, t);
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows, const Warnings& warnings,
                       const std::vector<std::pair<std::string, std::string>>& summary) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out.push_back(',');
      out += quote(fields[i]);
    }
    out.push_back('\n');
  };
  line(header);
  for (const auto& r : rows) line(r);
  for (const auto& [key, value] : summary) out += "#" + key + "," + value + "\n";
  if (!warnings.empty()) {
    out += "#warnings\n";
    for (const auto& w : warnings) out += "# " + single_line(w) + "\n";
  }
  return out;
}

std::string feature_frequency_csv(const InteractionTensor& omega) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& fc : feature_frequency(omega)) {
    rows.push_back({std::to_string(fc.feature), std::to_string(fc.data_count)});
  }
  return render_csv({"feature_id", "data_count"}, rows);
}

std::string confidence_csv(const InteractionTensor& omega, const PredictionMatrix& preds) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : confidence_feature_table(omega, preds)) {
    rows.push_back({std::to_string(r.datum), format_number(r.confidence), std::to_string(r.n_features)});
  }
  return render_csv({"datum", "confidence", "n_features"}, rows);
}

std::string density_csv(const InteractionTensor& omega, const PredictionMatrix& preds) {
  Warnings w;
  const auto d = split_feature_density(omega, preds, &w);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < d.features.size(); ++i) {
    rows.push_back({std::to_string(i), std::to_string(d.features[i]), format_number(d.high[i]),
                    format_number(d.low[i])});
  }
  return render_csv({"rank", "feature_id", "high_density", "low_density"}, rows, w,
                    {{"high_size", std::to_string(d.high_size)}, {"low_size", std::to_string(d.low_size)}});
}

std::string data_model_csv(const InteractionTensor& omega) {
  Warnings w;
  const auto d = data_model_counts(omega, &w);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : d.records) {
    rows.push_back({std::to_string(r.feature), std::to_string(r.data_count), std::to_string(r.model_count)});
  }
  return render_csv({"feature_id", "data_count", "model_count"}, rows, w,
                    {{"pearson", d.correlation ? format_number(*d.correlation) : std::string("nan")}});
}

std::string shared_error_csv(const InteractionTensor& omega, const PredictionMatrix& preds,
                             MistakeMode mode) {
  require_data(omega, preds);
  Warnings w;
  const auto table = shared_error_table(model_features(omega), preds, mode, &w);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table) {
    rows.push_back({std::to_string(r.model_i), std::to_string(r.model_j), std::to_string(r.shared_features),
                    format_number(r.shared_error)});
  }
  return render_csv({"model_i", "model_j", "shared_features", "shared_error"}, rows, w,
                    {{"mode", mode == MistakeMode::Identical ? "identical" : "joint"}});
}

std::string neighbors_csv(const InteractionTensor& omega, std::size_t index, std::size_t top_k) {
  std::vector<std::vector<std::string>> rows;
  std::size_t rank = 0;
  for (const auto& nb : nearest_neighbors(data_features(omega), index, top_k)) {
    rows.push_back({std::to_string(rank++), std::to_string(nb.datum), format_number(nb.similarity)});
  }
  Warnings w;
  if (data_features(omega).row_set(index).empty()) {
    w.push_back("query datum " + std::to_string(index) + " has no features");
  }
  return render_csv({"rank", "datum", "similarity"}, rows, w, {{"query", std::to_string(index)}});
}

std::string per_class_csv(const InteractionTensor& omega, const std::vector<int>& true_labels,
                          int num_classes) {
  const auto table = per_class_frequency(data_features(omega), true_labels, num_classes);
  std::vector<std::string> header{"feature_id"};
  for (int c = 0; c < num_classes; ++c) header.push_back("class_" + std::to_string(c));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < table.size(); ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (const auto v : table[t]) row.push_back(std::to_string(v));
    rows.push_back(std::move(row));
  }
  return render_csv(header, rows);
}

}  // namespace ifl
