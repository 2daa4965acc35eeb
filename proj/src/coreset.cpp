#include "lcg/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "lcg/binary_io.hpp"
#include "lcg/error.hpp"

namespace lcg {

namespace {

bool closer(const CoreEntry& a, const CoreEntry& b) {
  return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
}

}  // namespace

CoresetMode parse_coreset_mode(std::string_view name) {
  if (name == "nearest_fraction") return CoresetMode::nearest_fraction;
  if (name == "distance_percentile") return CoresetMode::distance_percentile;
  throw ConfigError("unknown coreset mode '" + std::string(name) + "'");
}

std::string_view to_string(CoresetMode mode) noexcept {
  return mode == CoresetMode::nearest_fraction ? "nearest_fraction" : "distance_percentile";
}

CoreSet select_coreset(const ClusterModel& model, CoresetMode mode, double parameter) {
  if (mode == CoresetMode::nearest_fraction && !(parameter > 0.0 && parameter <= 1.0)) {
    throw ConfigError("coreset: nearest_fraction parameter must be in (0, 1], got " + std::to_string(parameter));
  }
  if (mode == CoresetMode::distance_percentile && !(parameter > 0.0 && parameter <= 100.0)) {
    throw ConfigError("coreset: distance_percentile parameter must be in (0, 100], got " +
                      std::to_string(parameter));
  }
  if (model.distance.size() != model.assignment.size()) {
    throw DataError("coreset: cluster model has mismatched assignment/distance lengths");
  }

  std::vector<std::vector<CoreEntry>> clusters(model.k);
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    const auto c = model.assignment[i];
    if (c >= model.k) throw DataError("coreset: assignment out of range");
    clusters[c].push_back({static_cast<RecordId>(i), c, model.distance[i]});
  }

  CoreSet out;
  out.mode = mode;
  out.parameter = parameter;
  out.num_classes = model.k;
  if (mode == CoresetMode::distance_percentile) out.gamma_per_cluster.assign(model.k, 0.0);

  for (std::size_t c = 0; c < model.k; ++c) {
    auto& members = clusters[c];
    if (members.empty()) throw DataError("coreset: cluster " + std::to_string(c) + " is empty");
    std::sort(members.begin(), members.end(), closer);
    const double n = static_cast<double>(members.size());

    std::size_t take = 0;
    if (mode == CoresetMode::nearest_fraction) {
      // The relative nudge keeps f*n on the right side of an integer when f
      // is not exactly representable (0.03 * 100 must give 3).
      take = static_cast<std::size_t>(std::floor(parameter * n * (1.0 + 1e-12)));
    } else {
      const auto rank = static_cast<std::size_t>(std::ceil(parameter / 100.0 * n * (1.0 - 1e-12)));
      const double gamma = members[std::clamp<std::size_t>(rank, 1, members.size()) - 1].distance;
      out.gamma_per_cluster[c] = gamma;
      take = static_cast<std::size_t>(
          std::partition_point(members.begin(), members.end(),
                               [gamma](const CoreEntry& e) { return e.distance < gamma; }) -
          members.begin());
    }
    take = std::clamp<std::size_t>(take, 1, members.size());

    std::vector<CoreEntry> chosen(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    out.entries.insert(out.entries.end(), chosen.begin(), chosen.end());
  }
  return out;
}

std::vector<RecordId> remainder_ids(const CoreSet& coreset, std::size_t n) {
  std::vector<bool> in_core(n, false);
  for (const auto& e : coreset.entries) {
    if (e.id >= n) throw DataError("coreset id " + std::to_string(e.id) + " out of range");
    in_core[e.id] = true;
  }
  std::vector<RecordId> out;
  out.reserve(n - coreset.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_core[i]) out.push_back(static_cast<RecordId>(i));
  }
  return out;
}

void write_coreset(const std::filesystem::path& path, const CoreSet& coreset) {
  std::string out;
  for (const auto& e : coreset.entries) {
    nlohmann::ordered_json obj;
    obj["id"] = e.id;
    obj["pseudo_label"] = e.pseudo_label;
    obj["distance"] = e.distance;
    out += obj.dump();
    out += '\n';
  }
  write_file_text(path, out);
}

CoreSet read_coreset(const std::filesystem::path& path, std::size_t num_classes) {
  const auto bytes = read_file_bytes(path);
  std::istringstream lines(std::string(bytes.begin(), bytes.end()));
  CoreSet cs;
  cs.num_classes = num_classes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      CoreEntry e{obj.at("id").get<RecordId>(), obj.at("pseudo_label").get<std::uint32_t>(),
                  obj.at("distance").get<double>()};
      if (e.pseudo_label >= num_classes) throw DataError("pseudo_label out of range");
      cs.entries.push_back(e);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cs;
}

}  // namespace lcg
