#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcg {

using RecordId = std::uint32_t;
using Digest = std::array<std::uint8_t, 32>;

/// One instruction/input/output triple. `id` is the record's position in the source.
struct InstructionRecord {
  RecordId id = 0;
  std::string instruction;
  std::string input;
  std::string output;
};

/// Immutable after load; records are in source order with ids 0..N-1.
struct Dataset {
  std::vector<InstructionRecord> records;
  Digest source_digest{};

  std::size_t size() const noexcept { return records.size(); }
  const InstructionRecord& operator[](RecordId id) const { return records.at(id); }
};

enum class DatasetFormat { jsonl, json_array };

DatasetFormat parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format) noexcept;

Digest sha256(std::span<const std::uint8_t> bytes);
std::string to_hex(const Digest& digest);

/// Parses an in-memory source. The digest covers `bytes` exactly.
Dataset parse_dataset(std::span<const std::uint8_t> bytes, DatasetFormat format);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// Writes the selected records as JSONL in ascending id order. Duplicate ids
/// collapse. Returns the number of lines written.
std::size_t write_subset(const Dataset& dataset, std::span<const RecordId> ids,
                         const std::filesystem::path& path);

/// The text a record contributes to embedding and tokenization: instruction + " " + input.
std::string record_text(const InstructionRecord& record);

}  // namespace lcg
