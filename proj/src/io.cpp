#include "spintomo/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace spintomo::io {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = __builtin_bswap64(v);
  }
  return v;
}

}  // namespace

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          "complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

json spin_matrix_to_json(const SpinMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

SpinMatrix spin_matrix_from_json(const json& j, int dim) {
  require(j.is_array() && static_cast<int>(j.size()) == dim, "matrix must have 2s+1 rows");
  SpinMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    require(j[r].is_array() && static_cast<int>(j[r].size()) == dim,
            "matrix must have 2s+1 columns");
    for (int c = 0; c < dim; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

json frame_to_json(const SpinFrame& frame) {
  json j;
  j["spin"] = frame.spin().value();
  json dirs = json::array();
  for (const auto& d : frame.directions()) dirs.push_back({d.vec().x(), d.vec().y(), d.vec().z()});
  j["directions"] = dirs;
  j["eigenvalues"] = frame.eigenvalues();
  json deq = json::array();
  for (const auto& u : frame.dequantizer()) deq.push_back(spin_matrix_to_json(u));
  j["dequantizer"] = deq;
  json quant = json::array();
  for (const auto& d : frame.quantizer()) quant.push_back(spin_matrix_to_json(d));
  j["quantizer"] = quant;
  return j;
}

SpinFrame frame_from_json(const json& j) {
  require(j.is_object(), "frame document must be an object");
  for (const auto& [key, value] : j.items()) {
    require(key == "spin" || key == "directions" || key == "eigenvalues" ||
                key == "dequantizer" || key == "quantizer",
            "unknown frame key '" + key + "'");
  }
  require(j.contains("spin") && j["spin"].is_number(), "frame needs a numeric 'spin'");
  require(j.contains("directions") && j["directions"].is_array(), "frame needs 'directions'");
  require(j.contains("eigenvalues") && j["eigenvalues"].is_array(), "frame needs 'eigenvalues'");
  const Spin spin = Spin::from_value(j["spin"].get<double>());
  std::vector<Direction> dirs;
  for (const auto& d : j["directions"]) {
    require(d.is_array() && d.size() == 3, "directions must be 3-vectors");
    dirs.emplace_back(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
  }
  const auto eigenvalues = j["eigenvalues"].get<std::vector<double>>();
  SpinFrame frame(spin, std::move(dirs), eigenvalues);
  auto compare = [&](const char* key, const std::vector<SpinMatrix>& rebuilt) {
    if (!j.contains(key)) return;
    const json& stored = j[key];
    require(stored.is_array() && stored.size() == rebuilt.size(),
            std::string("'") + key + "' has the wrong number of matrices");
    for (std::size_t i = 0; i < rebuilt.size(); ++i) {
      const SpinMatrix m = spin_matrix_from_json(stored[i], spin.dim());
      const double diff = (m - rebuilt[i]).cwiseAbs().maxCoeff();
      if (diff > 1e-10) {
        std::ostringstream msg;
        msg << "stored " << key << "[" << i << "] differs from the rebuilt frame by " << diff;
        throw InvalidArgument(msg.str());
      }
    }
  };
  compare("dequantizer", frame.dequantizer());
  compare("quantizer", frame.quantizer());
  return frame;
}

json grid_to_json(const PhaseSpaceGrid& g) {
  return {{"n", g.n},       {"q_min", g.q_min}, {"q_max", g.q_max},       {"hbar", g.hbar},
          {"mass", g.mass}, {"omega", g.omega}, {"dimension", g.dimension}};
}

PhaseSpaceGrid grid_from_json(const json& j) {
  PhaseSpaceGrid g;
  g.n = j.at("n").get<int>();
  g.q_min = j.at("q_min").get<double>();
  g.q_max = j.at("q_max").get<double>();
  g.hbar = j.value("hbar", 1.0);
  g.mass = j.value("mass", 1.0);
  g.omega = j.value("omega", 1.0);
  g.dimension = j.value("dimension", 1);
  g.validate();
  return g;
}

json domain_to_json(const TomogramDomain& d) {
  json j;
  j["n_x"] = d.x.size();
  j["x_half"] = d.x_half();
  j["theta"] = std::vector<double>(d.theta.data(), d.theta.data() + d.theta.size());
  json samples = json::array();
  for (const auto& [mu, nu] : d.symplectic) samples.push_back({mu, nu});
  j["symplectic"] = samples;
  return j;
}

TomogramDomain domain_from_json(const json& j) {
  TomogramDomain d;
  const int n_x = j.at("n_x").get<int>();
  const double x_half = j.at("x_half").get<double>();
  d.x.resize(n_x);
  for (int m = 0; m < n_x; ++m) d.x(m) = -x_half + (m + 0.5) * 2.0 * x_half / n_x;
  const auto theta = j.value("theta", std::vector<double>{});
  d.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  for (const auto& s : j.value("symplectic", json::array())) {
    d.symplectic.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
  }
  return d;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

void write_field(const fs::path& stem, const Eigen::MatrixXd& values, json meta) {
  fs::path bin = stem;
  bin += ".bin";
  fs::path side = stem;
  side += ".json";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + bin.string());
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::uint64_t bits;
      const double v = values(r, c);
      std::memcpy(&bits, &v, sizeof bits);
      bits = to_little_endian(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  meta["rows"] = values.rows();
  meta["cols"] = values.cols();
  meta["dtype"] = "float64";
  meta["byte_order"] = "little";
  meta["layout"] = "row-major";
  meta["data"] = bin.filename().string();
  write_json(side, meta);
}

Eigen::MatrixXd read_field(const fs::path& stem, json* meta) {
  fs::path side = stem;
  side += ".json";
  const json j = read_json(side);
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  require(j.value("dtype", "") == "float64" && j.value("byte_order", "") == "little",
          "unsupported field encoding in " + side.string());
  const fs::path bin = side.parent_path() / j.at("data").get<std::string>();
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + bin.string());
  Eigen::MatrixXd values(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::uint64_t bits;
      in.read(reinterpret_cast<char*>(&bits), sizeof bits);
      if (!in) throw std::runtime_error("truncated field file " + bin.string());
      bits = to_little_endian(bits);
      std::memcpy(&values(r, c), &bits, sizeof bits);
    }
  }
  if (meta != nullptr) *meta = j;
  return values;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) { row({}, values); }

void CsvWriter::row(const std::vector<std::string>& labels, const std::vector<double>& values) {
  if (labels.size() + values.size() != columns_) {
    throw InvalidArgument("CSV row width does not match the header");
  }
  bool first = true;
  for (const auto& l : labels) {
    out_ << (first ? "" : ",") << l;
    first = false;
  }
  for (double v : values) {
    out_ << (first ? "" : ",") << format_number(v);
    first = false;
  }
  out_ << '\n';
}

void write_vector_distribution(const fs::path& dir, const std::string& stem,
                               const VectorDistribution& v) {
  fs::create_directories(dir);
  json meta;
  meta["representation"] = to_string(v.representation);
  meta["time"] = v.time;
  meta["grid"] = grid_to_json(v.grid);
  meta["domain"] = domain_to_json(v.domain);
  meta["frame"] = v.frame ? frame_to_json(*v.frame) : json();
  meta["max_imag_residue"] = v.max_imag_residue;
  json files = json::array();
  for (std::size_t j = 0; j < v.components.size(); ++j) {
    const std::string name = stem + "_w" + std::to_string(j + 1);
    write_field(dir / name, v.components[j],
                {{"kind", to_string(v.representation)}, {"component", j + 1}});
    files.push_back(name);
  }
  meta["components"] = files;
  write_json(dir / (stem + ".json"), meta);
}

VectorDistribution read_vector_distribution(const fs::path& meta_path) {
  const json meta = read_json(meta_path);
  VectorDistribution v;
  v.representation = representation_from_string(meta.at("representation").get<std::string>());
  v.time = meta.at("time").get<double>();
  v.grid = grid_from_json(meta.at("grid"));
  v.domain = domain_from_json(meta.at("domain"));
  if (!meta.at("frame").is_null()) {
    v.frame = std::make_shared<const SpinFrame>(frame_from_json(meta.at("frame")));
  }
  v.max_imag_residue = meta.value("max_imag_residue", 0.0);
  for (const auto& name : meta.at("components")) {
    v.components.push_back(read_field(meta_path.parent_path() / name.get<std::string>()));
  }
  return v;
}

void write_vector_csv(const fs::path& path, const VectorDistribution& v) {
  std::vector<std::string> header;
  const bool lattice =
      v.representation == Representation::Wigner || v.representation == Representation::Husimi;
  if (lattice) {
    header = {"q", "p"};
  } else if (v.representation == Representation::Optical) {
    header = {"X", "theta"};
  } else {
    header = {"X", "mu", "nu"};
  }
  for (std::size_t j = 0; j < v.components.size(); ++j) header.push_back("w" + std::to_string(j + 1));
  CsvWriter csv(path, header);
  if (v.components.empty()) return;
  const auto rows = v.components[0].rows();
  const auto cols = v.components[0].cols();
  const WignerLattice lat = v.grid.lattice();
  std::vector<double> row;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      row.clear();
      if (lattice) {
        row = {lat.q(static_cast<int>(r)), lat.p(static_cast<int>(c))};
      } else if (v.representation == Representation::Optical) {
        row = {v.domain.x(r), v.domain.theta(c)};
      } else {
        const auto [mu, nu] = v.domain.symplectic[static_cast<std::size_t>(c)];
        row = {v.domain.x(r), mu, nu};
      }
      for (const auto& comp : v.components) row.push_back(comp(r, c));
      csv.row(row);
    }
  }
}

void write_trajectory(const fs::path& dir, const VectorTrajectory& traj, const json& field,
                      const std::string& scheme) {
  fs::create_directories(dir);
  json manifest;
  manifest["scheme"] = scheme;
  manifest["field"] = field;
  json times = json::array();
  json frames = json::array();
  for (std::size_t f = 0; f < traj.frames.size(); ++f) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%04zu", f);
    write_vector_distribution(dir, stem, traj.frames[f]);
    times.push_back(traj.frames[f].time);
    frames.push_back(std::string(stem) + ".json");
  }
  manifest["times"] = times;
  manifest["frames"] = frames;
  manifest["conserved"] = "conserved.csv";
  write_json(dir / "manifest.json", manifest);
  CsvWriter csv(dir / "conserved.csv", {"t", "trace", "energy", "norm_sum", "residual_max"});
  for (const auto& r : traj.conserved) csv.row({r.t, r.trace, r.energy, r.norm_sum, r.residual_max});
}

void emit_plot_data(const VectorTrajectory& traj, PlotData what, const fs::path& path,
                    double theta) {
  if (traj.frames.empty()) throw InvalidArgument("cannot plot an empty trajectory");
  switch (what) {
    case PlotData::ComponentIntegrals: {
      CsvWriter csv(path, {"t", "series", "value"});
      for (const auto& v : traj.frames) {
        const Eigen::VectorXd w = v.integrals();
        for (Eigen::Index j = 0; j < w.size(); ++j) {
          csv.row({format_number(v.time), "w" + std::to_string(j + 1)}, {w(j)});
        }
      }
      break;
    }
    case PlotData::Conserved: {
      CsvWriter csv(path, {"t", "series", "value"});
      for (const auto& r : traj.conserved) {
        const std::string t = format_number(r.t);
        csv.row({t, "trace"}, {r.trace});
        csv.row({t, "energy"}, {r.energy});
        csv.row({t, "norm_sum"}, {r.norm_sum});
        csv.row({t, "residual_max"}, {r.residual_max});
      }
      break;
    }
    case PlotData::Slice: {
      CsvWriter csv(path, {"t", "series", "X", "value"});
      for (const auto& v : traj.frames) {
        const std::string t = format_number(v.time);
        Eigen::VectorXd coords;
        std::vector<Eigen::VectorXd> profiles;
        if (v.representation == Representation::Optical) {
          Eigen::Index best = 0;
          for (Eigen::Index i = 1; i < v.domain.theta.size(); ++i) {
            if (std::abs(v.domain.theta(i) - theta) < std::abs(v.domain.theta(best) - theta)) {
              best = i;
            }
          }
          coords = v.domain.x;
          for (const auto& c : v.components) profiles.push_back(c.col(best));
        } else if (v.representation == Representation::SymplecticSection) {
          coords = v.domain.x;
          for (const auto& c : v.components) profiles.push_back(c.col(0));
        } else {
          const WignerLattice lat = v.grid.lattice();
          coords = lat.qs();
          for (const auto& c : v.components) profiles.push_back(c.rowwise().sum() * lat.dp);
        }
        for (std::size_t j = 0; j < profiles.size(); ++j) {
          const std::string series = "w" + std::to_string(j + 1);
          for (Eigen::Index m = 0; m < coords.size(); ++m) {
            csv.row({t, series}, {coords(m), profiles[j](m)});
          }
        }
      }
      break;
    }
  }
}

}  // namespace spintomo::io
