#include "cotrep/reading.hpp"

#include <cmath>
#include <cstdio>

#include "cotrep/error.hpp"

namespace cotrep {

StimulusPair::StimulusPair(std::string id, std::string negative, std::string positive)
    : id_(std::move(id)), negative_(std::move(negative)), positive_(std::move(positive)) {
  if (negative_.empty() || positive_.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "stimulus pair '" + id_ + "' has an empty side");
  }
  if (negative_ == positive_) {
    throw Error(ErrorKind::kInvalidConfig, "stimulus pair '" + id_ + "' has identical sides");
  }
}

NeuralActivity last_token_activity(const ActivationTensor& tensor) {
  if (tensor.n_tokens() == 0) throw Error(ErrorKind::kDimMismatch, "tensor has no tokens");
  NeuralActivity a{tensor.n_layers(), tensor.dim(), {}};
  a.values.reserve(a.n_layers * a.dim);
  const std::size_t last = tensor.n_tokens() - 1;
  for (std::size_t l = 0; l < tensor.n_layers(); ++l) {
    const auto row = tensor.at(l, last);
    a.values.insert(a.values.end(), row.begin(), row.end());
  }
  return a;
}

std::vector<ActivityPair> collect_activity(std::span<const StimulusPair> pairs, Backend& backend) {
  if (pairs.empty()) throw Error(ErrorKind::kInvalidConfig, "no stimulus pairs");
  std::vector<ActivityPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({last_token_activity(backend.represent(p.negative())),
                   last_token_activity(backend.represent(p.positive()))});
  }
  return out;
}

DifferenceSet differences(std::span<const ActivityPair> activities,
                          std::span<const std::string> pair_ids) {
  if (activities.empty()) throw Error(ErrorKind::kInvalidConfig, "no activity pairs");
  const std::size_t n_layers = activities[0].negative.n_layers;
  const std::size_t dim = activities[0].negative.dim;
  const auto n = static_cast<Eigen::Index>(activities.size());

  DifferenceSet set;
  set.per_layer.assign(n_layers, Eigen::MatrixXd(n, static_cast<Eigen::Index>(dim)));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& pair = activities[static_cast<std::size_t>(k)];
    for (const auto* side : {&pair.negative, &pair.positive}) {
      if (side->n_layers != n_layers || side->dim != dim) {
        throw Error(ErrorKind::kDimMismatch, "activity shapes differ across pairs");
      }
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
      const auto pos = pair.positive.layer(l);
      const auto neg = pair.negative.layer(l);
      for (std::size_t j = 0; j < dim; ++j) {
        set.per_layer[l](k, static_cast<Eigen::Index>(j)) =
            static_cast<double>(pos[j]) - static_cast<double>(neg[j]);
      }
    }
    set.pair_ids.push_back(static_cast<std::size_t>(k) < pair_ids.size()
                               ? pair_ids[static_cast<std::size_t>(k)]
                               : std::to_string(k));
  }
  return set;
}

PrincipalComponent first_principal_component(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    throw Error(ErrorKind::kDegenerateInput, "empty matrix");
  }
  if (!rows.allFinite()) throw Error(ErrorKind::kDegenerateInput, "non-finite entries");

  PrincipalComponent pc;
  if (rows.rows() == 1) {
    const double norm = rows.row(0).norm();
    if (norm == 0.0) throw Error(ErrorKind::kDegenerateInput, "single all-zero row");
    pc.direction = rows.row(0).transpose() / norm;
    pc.explained_variance = 1.0;
    return pc;
  }

  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  const double centered_norm = centered.norm();
  if (centered_norm <= 1e-12 * std::max(rows.norm(), 1e-300)) {
    throw Error(ErrorKind::kDegenerateInput, "rows carry no variance after centering");
  }

  // Eigenproblem on the smaller of the Gram and scatter matrices.
  Eigen::VectorXd direction;
  double top = 0.0;
  double total = 0.0;
  if (centered.rows() <= centered.cols()) {
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::Index last = gram.rows() - 1;
    direction = centered.transpose() * eig.eigenvectors().col(last);
    top = eig.eigenvalues()(last);
    total = eig.eigenvalues().sum();
  } else {
    const Eigen::MatrixXd scatter = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
    const Eigen::Index last = scatter.rows() - 1;
    direction = eig.eigenvectors().col(last);
    top = eig.eigenvalues()(last);
    total = eig.eigenvalues().sum();
  }
  direction.normalize();

  Eigen::Index arg = 0;
  direction.cwiseAbs().maxCoeff(&arg);
  if (direction(arg) < 0) direction = -direction;

  pc.direction = std::move(direction);
  pc.explained_variance = total > 0 ? top / total : 0.0;
  return pc;
}

ReadingVector fit_reading_vector(const DifferenceSet& diffs) {
  ReadingVector v;
  v.provenance.n_pairs = diffs.n_pairs();
  for (std::size_t l = 0; l < diffs.per_layer.size(); ++l) {
    const Eigen::MatrixXd& d = diffs.per_layer[l];
    Eigen::MatrixXd symmetric(2 * d.rows(), d.cols());
    symmetric << d, -d;
    PrincipalComponent pc;
    try {
      pc = first_principal_component(symmetric);
    } catch (const Error& e) {
      throw Error(e.kind(), "layer " + std::to_string(l) + ": " + e.what());
    }
    const double mean_projection = (d * pc.direction).mean();
    const bool flip = mean_projection < 0.0;
    if (flip) pc.direction = -pc.direction;
    v.per_layer.push_back(std::move(pc.direction));
    v.flipped.push_back(flip);
    v.explained_variance.push_back(pc.explained_variance);
  }
  return v;
}

std::string stimulus_hash(std::span<const StimulusPair> pairs) {
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& p : pairs) {
    mix(p.id());
    mix(p.negative());
    mix(p.positive());
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReadingVector build_reading_vector(std::span<const StimulusPair> pairs, Backend& backend,
                                   std::size_t n_read) {
  if (n_read == 0 || n_read > pairs.size()) {
    throw Error(ErrorKind::kInvalidConfig, "n_read " + std::to_string(n_read) + " needs 1.." +
                                               std::to_string(pairs.size()) + " stimulus pairs");
  }
  const auto used = pairs.first(n_read);
  std::vector<std::string> ids;
  ids.reserve(used.size());
  for (const auto& p : used) ids.push_back(p.id());

  const auto activity = collect_activity(used, backend);
  ReadingVector v = fit_reading_vector(differences(activity, ids));
  v.provenance.backend = backend.descriptor().name;
  v.provenance.stimulus_hash = stimulus_hash(used);
  return v;
}

nlohmann::json to_json(const ReadingVector& v) {
  nlohmann::json vectors = nlohmann::json::array();
  for (const auto& layer : v.per_layer) {
    vectors.push_back(std::vector<double>(layer.data(), layer.data() + layer.size()));
  }
  const auto& p = v.provenance;
  return {{"version", 1},
          {"backend", p.backend},
          {"n_layers", v.n_layers()},
          {"dim", v.dim()},
          {"vectors", std::move(vectors)},
          {"orientation_flipped", v.flipped},
          {"explained_variance", v.explained_variance},
          {"provenance",
           {{"n_pairs", p.n_pairs},
            {"backend", p.backend},
            {"stimulus_hash", p.stimulus_hash},
            {"seed", p.seed},
            {"task", p.task},
            {"mode", p.mode},
            {"source", p.source}}}};
}

ReadingVector reading_vector_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) {
      throw Error(ErrorKind::kSchemaError, "unsupported reading vector version");
    }
    ReadingVector v;
    const auto n_layers = j.at("n_layers").get<std::size_t>();
    const auto dim = j.at("dim").get<std::size_t>();
    const auto& vectors = j.at("vectors");
    if (vectors.size() != n_layers) throw Error(ErrorKind::kSchemaError, "vectors/n_layers mismatch");
    for (const auto& layer : vectors) {
      const auto values = layer.get<std::vector<double>>();
      if (values.size() != dim) throw Error(ErrorKind::kSchemaError, "vector/dim mismatch");
      v.per_layer.push_back(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(dim)));
    }
    v.flipped = j.value("orientation_flipped", std::vector<bool>(n_layers, false));
    v.explained_variance = j.value("explained_variance", std::vector<double>(n_layers, 0.0));
    const auto& p = j.at("provenance");
    v.provenance.n_pairs = p.value("n_pairs", std::size_t{0});
    v.provenance.backend = p.value("backend", j.value("backend", std::string()));
    v.provenance.stimulus_hash = p.value("stimulus_hash", std::string());
    v.provenance.seed = p.value("seed", std::uint64_t{0});
    v.provenance.task = p.value("task", std::string());
    v.provenance.mode = p.value("mode", std::string());
    v.provenance.source = p.value("source", std::string());
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("reading vector JSON: ") + e.what());
  }
}

}  // namespace cotrep
