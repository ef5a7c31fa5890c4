#include "por/client_files.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "por/error.hpp"

namespace por {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string hex(ByteView b) { return to_hex(b); }

FieldElement element(const FieldPtr& f, const json& j) { return FieldElement::from_bytes(f, from_hex(j.get<std::string>())); }

Digest digest(const json& j) {
    const auto b = from_hex(j.get<std::string>());
    if (b.size() != 32) throw DecodeError("digest must be 32 bytes");
    Digest d;
    std::copy(b.begin(), b.end(), d.begin());
    return d;
}

template <class F>
auto parse_json(std::string_view text, const char* what, F&& body) {
    try {
        return body(json::parse(text));
    } catch (const json::exception& e) {
        throw DecodeError(std::string("bad ") + what + ": " + e.what());
    }
}

}  // namespace

FieldPtr field_for_bits(unsigned bits) {
    if (bits < 16 || bits > 4096) throw UsageError("prime size must be 16 to 4096 bits");
    if (bits == 256) return PrimeField::default_field();
    mpz_class base = 1;
    base <<= bits - 1;
    mpz_class p;
    mpz_nextprime(p.get_mpz_t(), base.get_mpz_t());
    return PrimeField::create(p);
}

std::string keys_to_json(const KeyMaterial& k) {
    json j;
    j["scheme"] = scheme_name(key_scheme(k.keys));
    j["prime"] = k.group->scalars()->modulus().get_str();
    std::visit(overloaded{
                   [&](const JkMacKeys& m) { j["mac"] = hex(m.mac.bytes); },
                   [&](const JkBlsKeys& b) { j["sk"] = hex(b.keys.sk.to_bytes()); },
                   [&](const SwPrivateKeys& p) {
                       j["alpha"] = hex(p.alpha.to_bytes());
                       j["prf"] = hex(p.prf.bytes);
                   },
                   [&](const SwPublicKeys& p) {
                       j["x"] = hex(p.x.to_bytes());
                       j["alpha"] = hex(p.pub.alpha.to_bytes());
                   },
                   [&](const SentinelKeys& s) {
                       j["values"] = hex(s.values.bytes);
                       j["layout"] = hex(s.layout.bytes);
                       j["pads"] = hex(s.pads.bytes);
                   },
               },
               k.keys);
    return j.dump(2) + "\n";
}

KeyMaterial keys_from_json(std::string_view text) {
    return parse_json(text, "key file", [](const json& j) {
        const auto field = PrimeField::create(mpz_class(j.at("prime").get<std::string>()));
        KeyMaterial k;
        k.group = BilinearGroup::transparent(field);
        const auto bytes = [&](const char* name) { return from_hex(j.at(name).get<std::string>()); };
        switch (parse_scheme(j.at("scheme").get<std::string>())) {
            case Scheme::jk_mac: k.keys = JkMacKeys{MacKey{bytes("mac")}}; break;
            case Scheme::jk_bls:
                k.keys = JkBlsKeys{BlsKeyPair::from_secret(k.group, element(field, j.at("sk")))};
                break;
            case Scheme::sw_private: k.keys = SwPrivateKeys{element(field, j.at("alpha")), PrfKey{bytes("prf")}}; break;
            case Scheme::sw_public: {
                auto x = element(field, j.at("x"));
                auto alpha = k.group->element_from_bytes(bytes("alpha"));
                k.keys = SwPublicKeys{x, SwPublicParams{k.group->power_of_g(x), alpha}};
                break;
            }
            case Scheme::sentinel:
                k.keys = SentinelKeys{PrfKey{bytes("values")}, PrfKey{bytes("layout")}, PrfKey{bytes("pads")}};
                break;
        }
        return k;
    });
}

void save_key_file(const fs::path& path, const KeyMaterial& k) {
    const auto text = keys_to_json(k);
    auto tmp = path;
    tmp += ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd < 0) throw UsageError("cannot write " + tmp.string() + ": " + std::strerror(errno));
    ::fchmod(fd, 0600);
    const bool ok = ::write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size());
    ::close(fd);
    if (!ok) throw Error("cannot write " + tmp.string());
    fs::rename(tmp, path);
}

KeyMaterial load_key_file(const fs::path& path) {
    const auto b = read_whole_file(path);
    return keys_from_json(std::string(b.begin(), b.end()));
}

fs::path key_file_path(const fs::path& fallback) {
    if (const char* env = std::getenv("POR_KEY_FILE"); env && *env) return env;
    return fallback;
}

std::string record_to_json(const ClientRecord& r) {
    json j;
    j["file_id"] = r.file_id;
    j["prime"] = r.field->modulus().get_str();
    if (r.manifest) {
        ByteWriter w;
        r.manifest->header.write(w);
        j["kind"] = "tagged";
        j["scheme"] = scheme_name(r.manifest->scheme);
        j["header"] = hex(w.bytes());
    }
    if (r.ledger) {
        j["sentinels"] = r.ledger->sentinels;
        j["next_unspent"] = r.ledger->next_unspent;
        j["file_blocks"] = r.ledger->file_blocks;
    }
    if (r.dynamic) {
        const auto& s = *r.dynamic;
        const auto code = s.params.c_code_or_default();
        j["kind"] = "dynamic";
        j["n"] = s.params.n;
        j["beta"] = s.params.beta;
        j["c_n"] = code.n;
        j["c_f"] = code.f;
        j["original_length"] = s.original_length;
        j["u_root"] = hex(s.u_root);
        j["c_root"] = hex(s.c_root);
        json levels = json::array();
        for (const auto& l : s.level_roots) levels.push_back(l ? json(hex(*l)) : json(nullptr));
        j["level_roots"] = levels;
        j["w"] = s.w;
        j["seq"] = s.seq;
        j["writes"] = s.writes;
        j["c_rebuilds"] = s.c_rebuilds;
        j["reencoded_symbols"] = s.reencoded_symbols;
    }
    return j.dump(2) + "\n";
}

ClientRecord record_from_json(std::string_view text) {
    return parse_json(text, "client record", [](const json& j) {
        ClientRecord r;
        r.file_id = j.at("file_id").get<std::string>();
        r.field = PrimeField::create(mpz_class(j.at("prime").get<std::string>()));
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "tagged") {
            FileManifest m;
            m.file_id = r.file_id;
            m.scheme = parse_scheme(j.at("scheme").get<std::string>());
            const auto hb = from_hex(j.at("header").get<std::string>());
            ByteReader hr(hb);
            m.header = ContainerHeader::read(hr);
            hr.expect_end();
            r.manifest = m;
            if (j.contains("sentinels")) {
                SentinelLedger l;
                l.file_id = r.file_id;
                l.sentinels = j.at("sentinels").get<std::uint64_t>();
                l.next_unspent = j.at("next_unspent").get<std::uint64_t>();
                l.file_blocks = j.at("file_blocks").get<std::uint64_t>();
                r.ledger = l;
            }
        } else if (kind == "dynamic") {
            DynClientState s;
            s.params.n = j.at("n").get<std::uint64_t>();
            s.params.beta = j.at("beta").get<std::size_t>();
            s.params.c_code = CodeParams(j.at("c_n").get<std::size_t>(), j.at("c_f").get<std::size_t>());
            s.original_length = j.at("original_length").get<std::uint64_t>();
            s.u_root = digest(j.at("u_root"));
            s.c_root = digest(j.at("c_root"));
            for (const auto& l : j.at("level_roots")) {
                s.level_roots.push_back(l.is_null() ? std::nullopt : std::optional<Digest>(digest(l)));
            }
            s.w = j.at("w").get<std::uint64_t>();
            s.seq = j.at("seq").get<std::uint64_t>();
            s.writes = j.at("writes").get<std::uint64_t>();
            s.c_rebuilds = j.at("c_rebuilds").get<std::uint64_t>();
            s.reencoded_symbols = j.at("reencoded_symbols").get<std::uint64_t>();
            r.dynamic = std::move(s);
        } else {
            throw DecodeError("unknown record kind " + kind);
        }
        return r;
    });
}

void save_record(const fs::path& path, const ClientRecord& r) { write_whole_file(path, as_bytes(record_to_json(r))); }

ClientRecord load_record(const fs::path& path) {
    const auto b = read_whole_file(path);
    return record_from_json(std::string(b.begin(), b.end()));
}

Bytes read_whole_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_whole_file(const fs::path& path, ByteView data) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace por
