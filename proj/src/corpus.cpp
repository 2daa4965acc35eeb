#include "lcg/corpus.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>

#include "lcg/binary_io.hpp"
#include "lcg/error.hpp"

namespace lcg {

namespace {

using json = nlohmann::json;

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string string_field(const json& obj, const char* key, bool required, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw DataError(where + ": missing \"" + key + "\" field");
    return {};
  }
  if (!it->is_string()) throw DataError(where + ": \"" + key + "\" must be a string");
  return it->get<std::string>();
}

InstructionRecord to_record(const json& obj, RecordId id, const std::string& where) {
  if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
  InstructionRecord rec;
  rec.id = id;
  rec.instruction = string_field(obj, "instruction", true, where);
  if (is_blank(rec.instruction)) throw DataError(where + ": \"instruction\" is empty");
  rec.input = string_field(obj, "input", false, where);
  rec.output = string_field(obj, "output", false, where);
  return rec;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "jsonl") return DatasetFormat::jsonl;
  if (name == "json-array" || name == "json_array" || name == "json") return DatasetFormat::json_array;
  throw ConfigError("unknown dataset format '" + std::string(name) + "' (expected jsonl or json-array)");
}

std::string_view to_string(DatasetFormat format) noexcept {
  return format == DatasetFormat::jsonl ? "jsonl" : "json-array";
}

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw DataError("SHA-256 computation failed");
  }
  return out;
}

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : digest) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xf]);
  }
  return s;
}

Dataset parse_dataset(std::span<const std::uint8_t> bytes, DatasetFormat format) {
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (is_blank(text)) throw DataError("dataset is empty");

  Dataset ds;
  ds.source_digest = sha256(bytes);

  if (format == DatasetFormat::jsonl) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      if (is_blank(line)) continue;
      const std::string where = "line " + std::to_string(line_no);
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError(where + ": JSON parse error: " + e.what());
      }
      ds.records.push_back(to_record(obj, static_cast<RecordId>(ds.records.size()), where));
    }
  } else {
    json arr;
    try {
      arr = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(line_of_offset(text, e.byte)) +
                      ": JSON parse error: " + e.what());
    }
    if (!arr.is_array()) throw DataError("expected a top-level JSON array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ds.records.push_back(to_record(arr[i], static_cast<RecordId>(i), "record " + std::to_string(i)));
    }
  }

  if (ds.records.empty()) throw DataError("dataset contains no records");
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_dataset(bytes, format);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::size_t write_subset(const Dataset& dataset, std::span<const RecordId> ids,
                         const std::filesystem::path& path) {
  std::vector<RecordId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (RecordId id : sorted) {
    if (id >= dataset.size()) throw DataError("write_subset: unknown record id " + std::to_string(id));
  }

  std::string out;
  for (RecordId id : sorted) {
    const auto& r = dataset.records[id];
    nlohmann::ordered_json obj;
    obj["instruction"] = r.instruction;
    obj["input"] = r.input;
    obj["output"] = r.output;
    out += obj.dump();
    out += '\n';
  }
  write_file_text(path, out);
  return sorted.size();
}

std::string record_text(const InstructionRecord& record) {
  std::string s;
  s.reserve(record.instruction.size() + 1 + record.input.size());
  s += record.instruction;
  s += ' ';
  s += record.input;
  return s;
}

}  // namespace lcg
