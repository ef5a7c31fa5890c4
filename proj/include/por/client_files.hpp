#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "por/por_dynamic.hpp"
#include "por/por_static.hpp"

namespace por {

/// Prime for a requested bit length: the default field for 256, otherwise the
/// smallest prime above 2^(bits-1). Throws UsageError outside [16, 4096].
FieldPtr field_for_bits(unsigned bits);

struct KeyMaterial {
    ClientKeys keys;
    GroupPtr group;
};

/// JSON text: scheme, prime and the key parts as hex.
std::string keys_to_json(const KeyMaterial& k);
KeyMaterial keys_from_json(std::string_view text);

/// Writes the key file readable by the owner only (mode 0600).
void save_key_file(const std::filesystem::path& path, const KeyMaterial& k);
KeyMaterial load_key_file(const std::filesystem::path& path);
/// `fallback` unless POR_KEY_FILE is set.
std::filesystem::path key_file_path(const std::filesystem::path& fallback);

/// Client-side record of an uploaded file.
struct ClientRecord {
    std::string file_id;
    // Tagged files.
    std::optional<FileManifest> manifest;
    std::optional<SentinelLedger> ledger;
    // Dynamic files.
    std::optional<DynClientState> dynamic;
    FieldPtr field;
};

std::string record_to_json(const ClientRecord& r);
ClientRecord record_from_json(std::string_view text);
void save_record(const std::filesystem::path& path, const ClientRecord& r);
ClientRecord load_record(const std::filesystem::path& path);

/// Reads a whole file; throws UsageError when it cannot be opened.
Bytes read_whole_file(const std::filesystem::path& path);
/// Write-then-rename.
void write_whole_file(const std::filesystem::path& path, ByteView data);

}  // namespace por
