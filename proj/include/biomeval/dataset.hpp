#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biomeval {

enum class Ethnicity { EastAsian, African, Caucasian, MiddleEastern, Hispanic, Indian, Unknown };
enum class Gender { Male, Female, Unknown };

std::string_view to_string(Ethnicity e);
std::string_view to_string(Gender g);

// Throw UnknownAttributeLabel on strings outside the closed enumerations.
Ethnicity parse_ethnicity(std::string_view label);
Gender parse_gender(std::string_view label);

struct DemographicAttributes {
    Ethnicity ethnicity = Ethnicity::Unknown;
    Gender gender = Gender::Unknown;
};

struct IdentityRecord {
    std::string identity_id;
    DemographicAttributes attributes;
    std::uint32_t variation_count = 0;
};

// One embedding vector for one image variation of one identity. Components
// are stored in 32-bit floats exactly as on disk; all arithmetic widens to
// 64-bit.
struct EmbeddingRecord {
    std::string identity_id;
    std::uint32_t variation_id = 0;
    std::vector<float> vector;
};

struct DatasetManifest {
    std::string name;
    std::uint32_t embedding_dimension = 0;
    std::vector<IdentityRecord> identities;
    std::string embedding_file; // relative to the manifest's directory
};

// A loaded, validated dataset. Identities and records are held in canonical
// order (identity_id lexicographic, variation_id ascending) regardless of
// on-disk record order, so all seeded sampling downstream is
// permutation-invariant. Immutable after load; safe to share across threads.
class Dataset {
public:
    Dataset(DatasetManifest manifest, std::vector<EmbeddingRecord> records);

    const DatasetManifest& manifest() const noexcept { return manifest_; }
    const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
    std::size_t identity_count() const noexcept { return manifest_.identities.size(); }

    // Index into manifest().identities; throws UnknownReference if absent.
    std::size_t identity_index(std::string_view identity_id) const;

    // Contiguous slice of records belonging to one identity, variation ascending.
    std::span<const EmbeddingRecord> records_of(std::string_view identity_id) const;

    // Throws UnknownReference when the (identity, variation) pair is absent.
    const EmbeddingRecord& record(std::string_view identity_id, std::uint32_t variation_id) const;

private:
    DatasetManifest manifest_;
    std::vector<EmbeddingRecord> records_;
    std::vector<std::size_t> offsets_; // records_ offset per identity, plus end sentinel
};

// On-disk format:
//   manifest.json  { name, embedding_dimension, identities: [ { identity_id,
//                    ethnicity, gender, variation_count } ], embedding_file }
//   embedding file binary, little-endian throughout: 4-byte magic "BEV1",
//   then per record: identity index into the manifest's identities array
//   (u32), variation_id (u32), then embedding_dimension IEEE-754 binary32
//   components. No compression, no padding.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes manifest + embedding file in canonical order. The embedding file is
// placed next to the manifest under manifest().embedding_file.
void write_dataset(const Dataset& dataset, const std::filesystem::path& manifest_path);

enum class GroupKey { Ethnicity, Gender, EthnicityGender };

// Partition of identity ids by demographic attribute. Every identity lands in
// exactly one group; empty groups are omitted. Group labels are the attribute
// names, joined with '/' for the combined key (e.g. "EastAsian/Female").
std::map<std::string, std::vector<std::string>> stratify(const Dataset& dataset, GroupKey key);

} // namespace biomeval
