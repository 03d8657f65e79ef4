// Copyright 2026 The rtqec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RTQEC_DATASET_H
#define RTQEC_DATASET_H

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtqec/code_model.h"
#include "rtqec/noise_sim.h"

namespace rtqec {

// File layout, all integers little-endian:
//
//   magic "QECDS1" (or "QECDF1" for defect exports)
//   u16 distance, u16 rounds, u8 basis (0 = Z, 1 = X), u32 shots, u64 seed
//   u32 metadata length, metadata bytes (UTF-8 JSON: noise, injections)
//   shots x payload
//
// Raw payload per shot: rounds*(d*d-1) ancilla bits, then d*d data bits,
// then truth bits (bit 0 = x flip, bit 1 = z flip). Each section is packed
// LSB-first and padded to a whole byte.
//
// Defect payload per shot: rounds*(d*d-1)/2 Z-type defects, the same for
// X-type (round-major, ancillas_of_type order), the (d*d-1)/2 final defects
// of the measured type, then the truth byte.
//
// Shot k carries the seed derive_seed(header seed, k); it is not stored.

inline constexpr char kDatasetMagic[7] = "QECDS1";
inline constexpr char kDefectMagic[7] = "QECDF1";

struct DatasetHeader {
    uint16_t distance = 3;
    uint16_t rounds = 1;
    Basis basis = Basis::Z;
    uint32_t shots = 0;
    uint64_t seed = 0;
    nlohmann::json metadata = nlohmann::json::object();

    size_t ancilla_bytes() const;
    size_t data_bytes() const;
    size_t raw_shot_bytes() const;
    size_t defect_shot_bytes() const;

    bool operator==(const DatasetHeader&) const = default;
};

/// Metadata blob describing how a dataset was generated.
nlohmann::json dataset_metadata(const NoiseParams& noise, const std::vector<InjectionSpec>& injections);

/// Streaming writer. Shots are written as they arrive, so memory use does not
/// grow with the shot count; the count in the header is patched on close().
class DatasetWriter {
   public:
    DatasetWriter(const std::string& path, DatasetHeader header);
    ~DatasetWriter();
    DatasetWriter(const DatasetWriter&) = delete;
    DatasetWriter& operator=(const DatasetWriter&) = delete;

    void write(const ShotRecord& shot);
    void close();
    uint32_t shots_written() const {
        return count_;
    }

   private:
    std::string path_;
    DatasetHeader header_;
    std::ofstream out_;
    std::vector<uint8_t> buffer_;
    uint32_t count_ = 0;
    bool closed_ = false;
};

class DatasetReader {
   public:
    explicit DatasetReader(const std::string& path);

    const DatasetHeader& header() const {
        return header_;
    }
    /// Reads the next shot; false at end of file.
    bool next(ShotRecord& shot);

   private:
    std::ifstream in_;
    DatasetHeader header_;
    std::vector<uint8_t> buffer_;
    uint32_t index_ = 0;
};

/// Writes `records`; every record must share the header shape and carry
/// seed derive_seed(seed, k) for its position k.
void export_dataset(
    const std::vector<ShotRecord>& records,
    const std::string& path,
    uint64_t seed,
    const nlohmann::json& metadata = nlohmann::json::object());

std::vector<ShotRecord> import_dataset(const std::string& path, DatasetHeader* header = nullptr);

/// Converts a raw dataset into the defect companion format.
void export_defects(const std::string& dataset_path, const std::string& defect_path);

/// Decoded defect shot, mirroring DefectHistory plus the truth labels.
struct DefectRecord {
    std::vector<uint8_t> z;  // rounds x per_type
    std::vector<uint8_t> x;
    std::vector<uint8_t> final_defects;
    bool truth_x_flip = false;
    bool truth_z_flip = false;

    bool operator==(const DefectRecord&) const = default;
};

std::vector<DefectRecord> import_defects(const std::string& path, DatasetHeader* header = nullptr);

/// Bit packing helpers shared by the file formats.
void pack_bits(const uint8_t* bits, size_t count, std::vector<uint8_t>& out);
void unpack_bits(const uint8_t* bytes, size_t count, uint8_t* bits);

}  // namespace rtqec

#endif
