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

#include "rtqec/dataset.h"

#include <cstring>
#include <stdexcept>

#include "rtqec/syndrome.h"

namespace rtqec {

namespace {

constexpr size_t kMagicLen = 6;
constexpr std::streamoff kShotCountOffset = kMagicLen + 2 + 2 + 1;

size_t bytes_for(size_t bits) {
    return (bits + 7) / 8;
}

template <typename T>
void put_le(std::vector<uint8_t>& out, T value) {
    for (size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<uint8_t>(static_cast<uint64_t>(value) >> (8 * i)));
    }
}

template <typename T>
T get_le(const uint8_t* p) {
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<uint64_t>(p[i]) << (8 * i);
    }
    return static_cast<T>(v);
}

std::vector<uint8_t> encode_header(const DatasetHeader& h, const char* magic) {
    std::vector<uint8_t> out(magic, magic + kMagicLen);
    put_le<uint16_t>(out, h.distance);
    put_le<uint16_t>(out, h.rounds);
    put_le<uint8_t>(out, static_cast<uint8_t>(h.basis));
    put_le<uint32_t>(out, h.shots);
    put_le<uint64_t>(out, h.seed);
    const std::string meta = h.metadata.dump();
    put_le<uint32_t>(out, static_cast<uint32_t>(meta.size()));
    out.insert(out.end(), meta.begin(), meta.end());
    return out;
}

void read_exact(std::ifstream& in, uint8_t* dst, size_t n, const char* what) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in.gcount()) != n) {
        throw std::runtime_error(std::string("truncated file while reading ") + what);
    }
}

DatasetHeader decode_header(std::ifstream& in, const char* magic) {
    uint8_t fixed[kMagicLen + 2 + 2 + 1 + 4 + 8 + 4];
    read_exact(in, fixed, sizeof(fixed), "header");
    if (std::memcmp(fixed, magic, kMagicLen) != 0) {
        throw std::runtime_error(std::string("bad magic: expected ") + magic);
    }
    const uint8_t* p = fixed + kMagicLen;
    DatasetHeader h;
    h.distance = get_le<uint16_t>(p);
    h.rounds = get_le<uint16_t>(p + 2);
    const uint8_t basis = p[4];
    if (basis > 1) {
        throw std::runtime_error("bad basis byte " + std::to_string(basis));
    }
    h.basis = static_cast<Basis>(basis);
    h.shots = get_le<uint32_t>(p + 5);
    h.seed = get_le<uint64_t>(p + 9);
    const uint32_t meta_len = get_le<uint32_t>(p + 17);
    std::string meta(meta_len, '\0');
    if (meta_len) {
        read_exact(in, reinterpret_cast<uint8_t*>(meta.data()), meta_len, "metadata");
    }
    h.metadata = meta.empty() ? nlohmann::json::object() : nlohmann::json::parse(meta);
    if (h.distance < 3 || h.distance % 2 == 0 || h.rounds < 1) {
        throw std::runtime_error("header has invalid distance or rounds");
    }
    return h;
}

size_t per_type(const DatasetHeader& h) {
    return (static_cast<size_t>(h.distance) * h.distance - 1) / 2;
}

}  // namespace

size_t DatasetHeader::ancilla_bytes() const {
    return bytes_for(static_cast<size_t>(rounds) * (static_cast<size_t>(distance) * distance - 1));
}

size_t DatasetHeader::data_bytes() const {
    return bytes_for(static_cast<size_t>(distance) * distance);
}

size_t DatasetHeader::raw_shot_bytes() const {
    return ancilla_bytes() + data_bytes() + 1;
}

size_t DatasetHeader::defect_shot_bytes() const {
    const size_t k = per_type(*this);
    return 2 * bytes_for(rounds * k) + bytes_for(k) + 1;
}

void pack_bits(const uint8_t* bits, size_t count, std::vector<uint8_t>& out) {
    const size_t base = out.size();
    out.resize(base + bytes_for(count), 0);
    for (size_t i = 0; i < count; ++i) {
        if (bits[i] & 1) {
            out[base + i / 8] |= static_cast<uint8_t>(1u << (i % 8));
        }
    }
}

void unpack_bits(const uint8_t* bytes, size_t count, uint8_t* bits) {
    for (size_t i = 0; i < count; ++i) {
        bits[i] = (bytes[i / 8] >> (i % 8)) & 1;
    }
}

nlohmann::json dataset_metadata(const NoiseParams& noise, const std::vector<InjectionSpec>& injections) {
    nlohmann::json inj = nlohmann::json::array();
    for (const auto& s : injections) {
        inj.push_back(s.to_json());
    }
    return {{"noise", noise.to_json()}, {"injections", inj}};
}

DatasetWriter::DatasetWriter(const std::string& path, DatasetHeader header)
    : path_(path), header_(std::move(header)), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    header_.shots = 0;
    auto bytes = encode_header(header_, kDatasetMagic);
    out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

DatasetWriter::~DatasetWriter() {
    if (!closed_) {
        try {
            close();
        } catch (...) {
        }
    }
}

void DatasetWriter::write(const ShotRecord& shot) {
    if (closed_) {
        throw std::logic_error("write after close");
    }
    if (shot.distance != header_.distance || shot.rounds != header_.rounds || shot.basis != header_.basis) {
        throw std::invalid_argument("heterogeneous shot shape: dataset is d=" + std::to_string(header_.distance) +
                                    " rounds=" + std::to_string(header_.rounds));
    }
    const size_t na = static_cast<size_t>(shot.rounds) * shot.num_ancillas();
    if (shot.ancilla_bits.size() != na || shot.data_bits.size() != static_cast<size_t>(shot.distance) * shot.distance) {
        throw std::invalid_argument("shot bit vectors do not match its declared shape");
    }
    if (count_ == UINT32_MAX) {
        throw std::length_error("dataset shot count exceeds u32");
    }
    buffer_.clear();
    pack_bits(shot.ancilla_bits.data(), na, buffer_);
    pack_bits(shot.data_bits.data(), shot.data_bits.size(), buffer_);
    buffer_.push_back(static_cast<uint8_t>((shot.truth_x_flip ? 1 : 0) | (shot.truth_z_flip ? 2 : 0)));
    out_.write(reinterpret_cast<const char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
    if (!out_) {
        throw std::runtime_error("write failed on '" + path_ + "'");
    }
    ++count_;
}

void DatasetWriter::close() {
    if (closed_) {
        return;
    }
    closed_ = true;
    std::vector<uint8_t> count;
    put_le<uint32_t>(count, count_);
    out_.seekp(kShotCountOffset);
    out_.write(reinterpret_cast<const char*>(count.data()), 4);
    out_.close();
    if (!out_) {
        throw std::runtime_error("failed to finalize '" + path_ + "'");
    }
}

DatasetReader::DatasetReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    header_ = decode_header(in_, kDatasetMagic);
    buffer_.resize(header_.raw_shot_bytes());
}

bool DatasetReader::next(ShotRecord& shot) {
    if (index_ >= header_.shots) {
        return false;
    }
    read_exact(in_, buffer_.data(), buffer_.size(), "shot payload");
    shot.distance = header_.distance;
    shot.rounds = header_.rounds;
    shot.basis = header_.basis;
    const size_t na = static_cast<size_t>(shot.rounds) * shot.num_ancillas();
    shot.ancilla_bits.resize(na);
    shot.data_bits.resize(static_cast<size_t>(shot.distance) * shot.distance);
    unpack_bits(buffer_.data(), na, shot.ancilla_bits.data());
    unpack_bits(buffer_.data() + header_.ancilla_bytes(), shot.data_bits.size(), shot.data_bits.data());
    const uint8_t truth = buffer_[header_.ancilla_bytes() + header_.data_bytes()];
    if (truth > 3) {
        throw std::runtime_error("bad truth byte in shot " + std::to_string(index_));
    }
    shot.truth_x_flip = truth & 1;
    shot.truth_z_flip = (truth >> 1) & 1;
    shot.seed = derive_seed(header_.seed, index_);
    ++index_;
    return true;
}

void export_dataset(
    const std::vector<ShotRecord>& records, const std::string& path, uint64_t seed, const nlohmann::json& metadata) {
    if (records.empty()) {
        throw std::invalid_argument("cannot export an empty record list");
    }
    DatasetHeader h;
    h.distance = records.front().distance;
    h.rounds = records.front().rounds;
    h.basis = records.front().basis;
    h.seed = seed;
    h.metadata = metadata;
    for (size_t k = 0; k < records.size(); ++k) {
        if (records[k].seed != derive_seed(seed, k)) {
            throw std::invalid_argument("record " + std::to_string(k) + " seed is not derive_seed(seed, " + std::to_string(k) + ")");
        }
    }
    DatasetWriter writer(path, h);
    for (const auto& r : records) {
        writer.write(r);
    }
    writer.close();
}

std::vector<ShotRecord> import_dataset(const std::string& path, DatasetHeader* header) {
    DatasetReader reader(path);
    std::vector<ShotRecord> out;
    out.reserve(reader.header().shots);
    ShotRecord rec;
    while (reader.next(rec)) {
        out.push_back(rec);
    }
    if (header) {
        *header = reader.header();
    }
    return out;
}

void export_defects(const std::string& dataset_path, const std::string& defect_path) {
    DatasetReader reader(dataset_path);
    const DatasetHeader& h = reader.header();
    const CodeLayout layout(h.distance);
    std::ofstream out(defect_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + defect_path + "' for writing");
    }
    auto head = encode_header(h, kDefectMagic);
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
    ShotRecord rec;
    std::vector<uint8_t> buf;
    while (reader.next(rec)) {
        const DefectHistory dh = compute_defects(layout, rec);
        buf.clear();
        pack_bits(dh.z.data(), dh.z.size(), buf);
        pack_bits(dh.x.data(), dh.x.size(), buf);
        pack_bits(dh.final_frame.defects.data(), dh.final_frame.defects.size(), buf);
        buf.push_back(static_cast<uint8_t>((rec.truth_x_flip ? 1 : 0) | (rec.truth_z_flip ? 2 : 0)));
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) {
        throw std::runtime_error("write failed on '" + defect_path + "'");
    }
}

std::vector<DefectRecord> import_defects(const std::string& path, DatasetHeader* header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    const DatasetHeader h = decode_header(in, kDefectMagic);
    const size_t k = per_type(h);
    const size_t rk = h.rounds * k;
    std::vector<uint8_t> buf(h.defect_shot_bytes());
    std::vector<DefectRecord> out(h.shots);
    for (auto& r : out) {
        read_exact(in, buf.data(), buf.size(), "defect payload");
        r.z.resize(rk);
        r.x.resize(rk);
        r.final_defects.resize(k);
        const uint8_t* p = buf.data();
        unpack_bits(p, rk, r.z.data());
        p += bytes_for(rk);
        unpack_bits(p, rk, r.x.data());
        p += bytes_for(rk);
        unpack_bits(p, k, r.final_defects.data());
        p += bytes_for(k);
        r.truth_x_flip = *p & 1;
        r.truth_z_flip = (*p >> 1) & 1;
    }
    if (header) {
        *header = h;
    }
    return out;
}

}  // namespace rtqec
