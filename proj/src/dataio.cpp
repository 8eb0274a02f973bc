#include "cadens/dataio.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cadens {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(t, &pos);
  } catch (...) {
    return false;
  }
  return pos == t.size();
}

}  // namespace

Dataset load_dataset(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);

  Dataset data;
  data.label = path;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::vector<int> bad_lines;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      std::string h = t;
      h.erase(std::remove_if(h.begin(), h.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }), h.end());
      if (h != "age,log10_load") {
        throw std::runtime_error("load_dataset: expected header 'age,log10_load' in " + path);
      }
      header_seen = true;
      continue;
    }
    const std::size_t comma = t.find(',');
    double x = 0.0, y = 0.0;
    const bool ok = comma != std::string::npos &&
                    parse_double(t.substr(0, comma), x) &&
                    parse_double(t.substr(comma + 1), y) && std::isfinite(x) &&
                    std::isfinite(y) && x >= 0.0;
    if (!ok) {
      bad_lines.push_back(lineno);
      continue;
    }
    data.records.push_back(Record{x, y});
  }
  if (!header_seen) {
    throw std::runtime_error("load_dataset: missing header in " + path);
  }
  if (!bad_lines.empty()) {
    std::ostringstream msg;
    msg << bad_lines.size() << " malformed row(s) at line(s):";
    for (int l : bad_lines) msg << ' ' << l;
    if (strict) throw std::runtime_error("load_dataset: " + msg.str());
    data.provenance = "loaded from " + path + "; skipped " + msg.str();
  } else {
    data.provenance = "loaded from " + path;
  }
  return data;
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  out << "age,log10_load\n";
  char buf[80];
  for (const auto& r : data.records) {
    std::snprintf(buf, sizeof(buf), "%.15g,%.15g\n", r.x, r.y);
    out << buf;
  }
}

Dataset apply_threshold(const Dataset& data, double y_min) {
  Dataset out;
  out.label = data.label;
  for (const auto& r : data.records) {
    if (r.y >= y_min) out.records.push_back(r);
  }
  std::ostringstream p;
  p << data.provenance << "; threshold y >= " << y_min << " kept "
    << out.records.size() << " of " << data.records.size();
  out.provenance = p.str();
  return out;
}

Dataset apply_permutation(const Dataset& data, const std::vector<int>& perm) {
  if (perm.size() != data.records.size()) {
    throw std::invalid_argument("apply_permutation: size mismatch");
  }
  Dataset out = data;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.records[i].y = data.records[static_cast<std::size_t>(perm[i])].y;
  }
  out.provenance = data.provenance + "; y permuted";
  return out;
}

Dataset permute_y(const Dataset& data, Rng rng) {
  if (data.records.size() < 2) {
    throw std::invalid_argument("permute_y: need at least two records");
  }
  const auto perm = random_permutation(static_cast<int>(data.records.size()), rng);
  return apply_permutation(data, perm);
}

Dataset swap_xy(const Dataset& data) {
  Dataset out = data;
  for (auto& r : out.records) std::swap(r.x, r.y);
  out.provenance = data.provenance + "; axes swapped";
  return out;
}

Dataset synthesize_counts(const Field& joint_density, Rng rng, bool jitter,
                          const std::string& label) {
  if (joint_density.dim() != 2) {
    throw std::invalid_argument("synthesize_counts: expected a 2-D density field");
  }
  const Grid1D& gx = joint_density.axes[0];
  const Grid1D& gy = joint_density.axes[1];
  const double pixvol = joint_density.pixel_volume();

  Dataset out;
  out.label = label;
  Eigen::Index idx = 0;
  for (int i = 0; i < gx.n_pixels; ++i) {
    for (int j = 0; j < gy.n_pixels; ++j, ++idx) {
      const double lam = joint_density.values[idx] * pixvol;
      const long n = poisson_draw(lam, rng);
      for (long m = 0; m < n; ++m) {
        double x = gx.center(i);
        double y = gy.center(j);
        if (jitter) {
          x += (rng.uniform() - 0.5) * gx.step;
          y += (rng.uniform() - 0.5) * gy.step;
        }
        out.records.push_back(Record{x, y});
      }
    }
  }
  out.provenance = "synthesized from density grid";
  return out;
}

}  // namespace cadens
