#include "biomeval/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "biomeval/error.hpp"

namespace biomeval {

namespace {

constexpr char kMagic[4] = {'B', 'E', 'V', '1'};

std::uint32_t decode_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void encode_u32_le(std::uint32_t v, unsigned char* p) {
    p[0] = static_cast<unsigned char>(v & 0xFF);
    p[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
    p[2] = static_cast<unsigned char>((v >> 16) & 0xFF);
    p[3] = static_cast<unsigned char>((v >> 24) & 0xFF);
}

float decode_f32_le(const unsigned char* p) {
    const std::uint32_t bits = decode_u32_le(p);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
}

void encode_f32_le(float f, unsigned char* p) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    encode_u32_le(bits, p);
}

bool record_less(const EmbeddingRecord& a, const EmbeddingRecord& b) {
    if (a.identity_id != b.identity_id) return a.identity_id < b.identity_id;
    return a.variation_id < b.variation_id;
}

} // namespace

std::string_view to_string(Ethnicity e) {
    switch (e) {
        case Ethnicity::EastAsian: return "EastAsian";
        case Ethnicity::African: return "African";
        case Ethnicity::Caucasian: return "Caucasian";
        case Ethnicity::MiddleEastern: return "MiddleEastern";
        case Ethnicity::Hispanic: return "Hispanic";
        case Ethnicity::Indian: return "Indian";
        case Ethnicity::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string_view to_string(Gender g) {
    switch (g) {
        case Gender::Male: return "Male";
        case Gender::Female: return "Female";
        case Gender::Unknown: return "Unknown";
    }
    return "Unknown";
}

Ethnicity parse_ethnicity(std::string_view label) {
    if (label == "EastAsian") return Ethnicity::EastAsian;
    if (label == "African") return Ethnicity::African;
    if (label == "Caucasian") return Ethnicity::Caucasian;
    if (label == "MiddleEastern") return Ethnicity::MiddleEastern;
    if (label == "Hispanic") return Ethnicity::Hispanic;
    if (label == "Indian") return Ethnicity::Indian;
    if (label == "Unknown") return Ethnicity::Unknown;
    raise(ErrorCode::UnknownAttributeLabel, "ethnicity label '" + std::string(label) + "'");
}

Gender parse_gender(std::string_view label) {
    if (label == "Male") return Gender::Male;
    if (label == "Female") return Gender::Female;
    if (label == "Unknown") return Gender::Unknown;
    raise(ErrorCode::UnknownAttributeLabel, "gender label '" + std::string(label) + "'");
}

Dataset::Dataset(DatasetManifest manifest, std::vector<EmbeddingRecord> records)
    : manifest_(std::move(manifest)), records_(std::move(records)) {
    if (manifest_.embedding_dimension == 0)
        raise(ErrorCode::InvalidManifest, "embedding_dimension must be positive");

    std::unordered_map<std::string, std::size_t> id_index;
    for (const auto& identity : manifest_.identities) {
        if (identity.identity_id.empty())
            raise(ErrorCode::InvalidManifest, "identity_id must be non-empty");
        if (identity.variation_count == 0)
            raise(ErrorCode::InvalidManifest,
                  "identity '" + identity.identity_id + "' declares zero variations");
        if (!id_index.emplace(identity.identity_id, id_index.size()).second)
            raise(ErrorCode::DuplicateIdentity, "identity '" + identity.identity_id + "'");
    }

    std::sort(manifest_.identities.begin(), manifest_.identities.end(),
              [](const IdentityRecord& a, const IdentityRecord& b) {
                  return a.identity_id < b.identity_id;
              });
    std::sort(records_.begin(), records_.end(), record_less);

    const std::size_t dim = manifest_.embedding_dimension;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& rec = records_[i];
        const std::string where =
            "identity '" + rec.identity_id + "' variation " + std::to_string(rec.variation_id);
        if (id_index.find(rec.identity_id) == id_index.end())
            raise(ErrorCode::UnknownReference, where + " not declared in manifest");
        if (rec.vector.size() != dim)
            raise(ErrorCode::DimensionMismatch,
                  where + " has " + std::to_string(rec.vector.size()) + " components, expected " +
                      std::to_string(dim));
        double norm_sq = 0.0;
        for (const float c : rec.vector) {
            if (!std::isfinite(c)) raise(ErrorCode::NonFiniteComponent, where);
            norm_sq += static_cast<double>(c) * static_cast<double>(c);
        }
        if (norm_sq == 0.0) raise(ErrorCode::ZeroNormVector, where);
        if (i > 0 && records_[i - 1].identity_id == rec.identity_id &&
            records_[i - 1].variation_id == rec.variation_id)
            raise(ErrorCode::DuplicateVariation, where);
    }

    offsets_.reserve(manifest_.identities.size() + 1);
    std::size_t cursor = 0;
    for (const auto& identity : manifest_.identities) {
        offsets_.push_back(cursor);
        std::size_t n = 0;
        while (cursor < records_.size() && records_[cursor].identity_id == identity.identity_id) {
            ++cursor;
            ++n;
        }
        if (n != identity.variation_count)
            raise(ErrorCode::VariationCountMismatch,
                  "identity '" + identity.identity_id + "' declares " +
                      std::to_string(identity.variation_count) + " variations but stores " +
                      std::to_string(n));
    }
    offsets_.push_back(cursor);
    if (cursor != records_.size())
        raise(ErrorCode::Internal, "record partition does not cover the store");
}

std::size_t Dataset::identity_index(std::string_view identity_id) const {
    const auto& ids = manifest_.identities;
    auto it = std::lower_bound(ids.begin(), ids.end(), identity_id,
                               [](const IdentityRecord& rec, std::string_view id) {
                                   return rec.identity_id < id;
                               });
    if (it == ids.end() || it->identity_id != identity_id)
        raise(ErrorCode::UnknownReference, "identity '" + std::string(identity_id) + "'");
    return static_cast<std::size_t>(it - ids.begin());
}

std::span<const EmbeddingRecord> Dataset::records_of(std::string_view identity_id) const {
    const std::size_t idx = identity_index(identity_id);
    return {records_.data() + offsets_[idx], offsets_[idx + 1] - offsets_[idx]};
}

const EmbeddingRecord& Dataset::record(std::string_view identity_id,
                                       std::uint32_t variation_id) const {
    const auto span = records_of(identity_id);
    auto it = std::lower_bound(span.begin(), span.end(), variation_id,
                               [](const EmbeddingRecord& rec, std::uint32_t v) {
                                   return rec.variation_id < v;
                               });
    if (it == span.end() || it->variation_id != variation_id)
        raise(ErrorCode::UnknownReference, "identity '" + std::string(identity_id) +
                                               "' variation " + std::to_string(variation_id));
    return *it;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
    std::ifstream manifest_in(manifest_path);
    if (!manifest_in)
        raise(ErrorCode::MissingFile, "manifest '" + manifest_path.string() + "'");

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(manifest_in);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::InvalidManifest, manifest_path.string() + ": " + e.what());
    }

    DatasetManifest manifest;
    std::vector<std::string> file_order_ids; // manifest order, for binary identity indices
    try {
        manifest.name = doc.at("name").get<std::string>();
        if (!doc.at("embedding_dimension").is_number_unsigned() &&
            !doc.at("embedding_dimension").is_number_integer())
            raise(ErrorCode::InvalidManifest, "embedding_dimension must be an integer");
        const auto dim = doc.at("embedding_dimension").get<std::int64_t>();
        if (dim <= 0) raise(ErrorCode::InvalidManifest, "embedding_dimension must be positive");
        manifest.embedding_dimension = static_cast<std::uint32_t>(dim);
        manifest.embedding_file = doc.at("embedding_file").get<std::string>();
        for (const auto& entry : doc.at("identities")) {
            IdentityRecord identity;
            identity.identity_id = entry.at("identity_id").get<std::string>();
            identity.attributes.ethnicity =
                parse_ethnicity(entry.at("ethnicity").get<std::string>());
            identity.attributes.gender = parse_gender(entry.at("gender").get<std::string>());
            const auto count = entry.at("variation_count").get<std::int64_t>();
            if (count <= 0)
                raise(ErrorCode::InvalidManifest,
                      "variation_count must be positive for '" + identity.identity_id + "'");
            identity.variation_count = static_cast<std::uint32_t>(count);
            file_order_ids.push_back(identity.identity_id);
            manifest.identities.push_back(std::move(identity));
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::InvalidManifest, manifest_path.string() + ": " + e.what());
    }

    if (manifest.identities.size() < 2)
        raise(ErrorCode::SingleIdentityDataset,
              "dataset '" + manifest.name + "' needs at least 2 identities, has " +
                  std::to_string(manifest.identities.size()));

    const auto store_path = manifest_path.parent_path() / manifest.embedding_file;
    std::ifstream store(store_path, std::ios::binary);
    if (!store) raise(ErrorCode::MissingFile, "embedding store '" + store_path.string() + "'");

    char magic[4];
    if (!store.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        raise(ErrorCode::InvalidManifest,
              "embedding store '" + store_path.string() + "' lacks the BEV1 magic");

    const std::size_t dim = manifest.embedding_dimension;
    const std::size_t record_bytes = 8 + 4 * dim;
    std::vector<unsigned char> buf(record_bytes);
    std::vector<EmbeddingRecord> records;
    for (;;) {
        store.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(record_bytes));
        const auto got = static_cast<std::size_t>(store.gcount());
        if (got == 0) break;
        const bool header_readable = got >= 8;
        std::string where = "record " + std::to_string(records.size());
        if (header_readable) {
            const std::uint32_t identity_index = decode_u32_le(buf.data());
            const std::uint32_t variation_id = decode_u32_le(buf.data() + 4);
            if (identity_index < file_order_ids.size())
                where = "identity '" + file_order_ids[identity_index] + "' variation " +
                        std::to_string(variation_id);
        }
        if (got < record_bytes)
            raise(ErrorCode::DimensionMismatch,
                  where + " holds " + std::to_string(got > 8 ? (got - 8) / 4 : 0) +
                      " components, expected " + std::to_string(dim));

        const std::uint32_t identity_index = decode_u32_le(buf.data());
        if (identity_index >= file_order_ids.size())
            raise(ErrorCode::UnknownReference,
                  "record " + std::to_string(records.size()) + " references identity index " +
                      std::to_string(identity_index));
        EmbeddingRecord rec;
        rec.identity_id = file_order_ids[identity_index];
        rec.variation_id = decode_u32_le(buf.data() + 4);
        rec.vector.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) rec.vector[i] = decode_f32_le(buf.data() + 8 + 4 * i);
        records.push_back(std::move(rec));
    }

    return Dataset(std::move(manifest), std::move(records));
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& manifest_path) {
    const auto& manifest = dataset.manifest();

    nlohmann::ordered_json doc;
    doc["name"] = manifest.name;
    doc["embedding_dimension"] = manifest.embedding_dimension;
    doc["identities"] = nlohmann::ordered_json::array();
    for (const auto& identity : manifest.identities) {
        doc["identities"].push_back({{"identity_id", identity.identity_id},
                                     {"ethnicity", to_string(identity.attributes.ethnicity)},
                                     {"gender", to_string(identity.attributes.gender)},
                                     {"variation_count", identity.variation_count}});
    }
    doc["embedding_file"] = manifest.embedding_file;

    if (manifest_path.has_parent_path())
        std::filesystem::create_directories(manifest_path.parent_path());
    {
        std::ofstream out(manifest_path);
        if (!out) raise(ErrorCode::IoError, "cannot write '" + manifest_path.string() + "'");
        out << doc.dump(2) << "\n";
        if (!out) raise(ErrorCode::IoError, "write failed for '" + manifest_path.string() + "'");
    }

    const auto store_path = manifest_path.parent_path() / manifest.embedding_file;
    std::ofstream store(store_path, std::ios::binary);
    if (!store) raise(ErrorCode::IoError, "cannot write '" + store_path.string() + "'");
    store.write(kMagic, 4);

    const std::size_t dim = manifest.embedding_dimension;
    std::vector<unsigned char> buf(8 + 4 * dim);
    for (const auto& rec : dataset.records()) {
        const std::size_t identity_index = dataset.identity_index(rec.identity_id);
        encode_u32_le(static_cast<std::uint32_t>(identity_index), buf.data());
        encode_u32_le(rec.variation_id, buf.data() + 4);
        for (std::size_t i = 0; i < dim; ++i) encode_f32_le(rec.vector[i], buf.data() + 8 + 4 * i);
        store.write(reinterpret_cast<const char*>(buf.data()),
                    static_cast<std::streamsize>(buf.size()));
    }
    if (!store) raise(ErrorCode::IoError, "write failed for '" + store_path.string() + "'");
}

std::map<std::string, std::vector<std::string>> stratify(const Dataset& dataset, GroupKey key) {
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& identity : dataset.manifest().identities) {
        std::string label;
        switch (key) {
            case GroupKey::Ethnicity:
                label = to_string(identity.attributes.ethnicity);
                break;
            case GroupKey::Gender:
                label = to_string(identity.attributes.gender);
                break;
            case GroupKey::EthnicityGender:
                label = std::string(to_string(identity.attributes.ethnicity)) + "/" +
                        std::string(to_string(identity.attributes.gender));
                break;
        }
        groups[label].push_back(identity.identity_id);
    }
    return groups;
}

} // namespace biomeval
