#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "por/adversary_sim.hpp"
#include "por/client_files.hpp"
#include "por/error.hpp"
#include "por/selftest.hpp"
#include "por/service.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace por;

namespace {

enum Exit : int { kOk = 0, kFailed = 1, kUsage = 2, kTransport = 3 };

struct Globals {
    std::optional<std::uint64_t> seed;
    bool json_lines = false;
    std::string keys;

    Rng rng() const { return seed ? Rng(*seed) : Rng(); }

    fs::path key_path() const { return keys.empty() ? key_file_path("por.key") : fs::path(keys); }

    /// One record per line with --json-lines, otherwise the human text.
    void emit(const json& record, const std::string& text) const {
        if (json_lines) {
            std::cout << record.dump() << "\n";
        } else {
            std::cout << text << "\n";
        }
        std::cout.flush();
    }
};

/// Local files that fail to parse are the operator's problem, not the server's.
template <class F>
auto load_local(const char* what, F&& body) {
    try {
        return body();
    } catch (const DecodeError& e) {
        throw UsageError(std::string("bad ") + what + ": " + e.what());
    }
}

KeyMaterial load_keys(const Globals& g) {
    return load_local("key file", [&] { return load_key_file(g.key_path()); });
}

ClientRecord load_client_record(const fs::path& p) {
    return load_local("record", [&] { return load_record(p); });
}

std::optional<ServerBehavior> damage_behavior(std::optional<double> erase, std::optional<double> corrupt,
                                              const std::string& placement_name) {
    if (erase && corrupt) throw UsageError("give either --erase or --corrupt");
    Placement placement = Placement::uniform;
    if (placement_name == "targeted") {
        placement = Placement::targeted;
    } else if (placement_name == "per-stripe") {
        placement = Placement::per_stripe;
    } else if (placement_name != "uniform") {
        throw UsageError("placement must be uniform, targeted or per-stripe");
    }
    if (erase) return EraseFraction{*erase, placement};
    if (corrupt) return CorruptFraction{*corrupt, placement};
    return std::nullopt;
}

int finish(const Globals& g, bool ok, const std::string& what, json extra = json::object()) {
    extra["command"] = what;
    extra["result"] = ok ? "PASS" : "FAIL";
    g.emit(extra, ok ? "PASS" : "FAIL");
    return ok ? kOk : kFailed;
}

// ---------------------------------------------------------------------------

int cmd_keygen(const Globals& g, const std::string& scheme, unsigned bits) {
    const auto s = parse_scheme(scheme);
    const auto field = field_for_bits(bits);
    auto rng = g.rng();
    KeyMaterial k;
    k.group = BilinearGroup::transparent(field);
    k.keys = generate_keys(s, k.group, rng);
    const auto path = g.key_path();
    save_key_file(path, k);
    g.emit({{"command", "keygen"}, {"scheme", scheme_name(s)}, {"bits", bits}, {"path", path.string()}},
           "wrote " + scheme_name(s) + " keys to " + path.string());
    return kOk;
}

int cmd_setup(const Globals& g, const fs::path& in, const fs::path& out, fs::path record_path, std::size_t n,
              std::size_t f, std::uint64_t sentinels) {
    const auto k = load_keys(g);
    const auto data = read_whole_file(in);
    const CodeParams code(n, f);
    ClientRecord rec;
    rec.field = k.group->scalars();
    TaggedFile store;
    if (const auto* sk = std::get_if<SentinelKeys>(&k.keys)) {
        auto s = sentinel_setup(data, *sk, rec.field, code, sentinels);
        store = std::move(s.store);
        rec.ledger = s.ledger;
    } else {
        store = por_setup(data, k.keys, k.group, code);
    }
    rec.file_id = store.file_id;
    rec.manifest = store.manifest();
    write_whole_file(out, store.serialize());
    if (record_path.empty()) record_path = fs::path(out.string() + ".record.json");
    save_record(record_path, rec);
    g.emit({{"command", "setup"},
            {"file_id", rec.file_id},
            {"blocks", store.size()},
            {"store", out.string()},
            {"record", record_path.string()}},
           "file " + rec.file_id + ": " + std::to_string(store.size()) + " blocks, store " + out.string() +
               ", record " + record_path.string());
    return kOk;
}

int cmd_upload(const Globals& g, const Address& addr, const fs::path& store_path) {
    const auto bytes = read_whole_file(store_path);
    const auto store = load_local("store", [&] { return TaggedFile::parse(bytes); });
    const auto id = client_upload(addr, store);
    g.emit({{"command", "upload"}, {"file_id", id}}, "stored " + id);
    return kOk;
}

int cmd_upload_dynamic(const Globals& g, const Address& addr, const fs::path& in, const fs::path& record_path,
                       std::uint64_t n, std::size_t beta, unsigned bits) {
    const auto field = field_for_bits(bits);
    const auto data = read_whole_file(in);
    DynParams params;
    params.n = n;
    params.beta = beta;
    auto [client, state] = DynClient::init(data, field, params);
    auto rng = g.rng();
    ClientRecord rec;
    rec.field = field;
    rec.file_id = client_upload_dynamic(addr, client, state, rng);
    rec.dynamic = client.state();
    save_record(record_path, rec);
    g.emit({{"command", "upload"}, {"file_id", rec.file_id}, {"record", record_path.string()}},
           "stored " + rec.file_id + ", record " + record_path.string());
    return kOk;
}

int cmd_audit(const Globals& g, const Address& addr, const fs::path& record_path, std::uint64_t l, std::uint64_t q) {
    auto rec = load_client_record(record_path);
    auto rng = g.rng();
    if (rec.dynamic) {
        const DynClient client(rec.field, *rec.dynamic);
        return finish(g, client_dyn_audit(addr, rec.file_id, client, l, rng), "audit");
    }
    const auto k = load_keys(g);
    if (rec.ledger) {
        const auto* sk = std::get_if<SentinelKeys>(&k.keys);
        if (!sk) throw UsageError("sentinel file needs sentinel keys");
        bool ok = false;
        try {
            ok = client_sentinel_audit(addr, *rec.ledger, *sk, rec.field, q);
        } catch (const IntegrityError&) {
            save_record(record_path, rec);
            throw;
        }
        // Spent sentinels stay spent whatever the outcome.
        save_record(record_path, rec);
        return finish(g, ok, "audit", {{"remaining", rec.ledger->audits_remaining(q)}});
    }
    if (key_scheme(k.keys) != rec.manifest->scheme) throw UsageError("key file does not match the file's scheme");
    const auto r = client_audit(addr, *rec.manifest, verifier_key(k.keys), k.group, l, rng);
    if (!r.ok && !r.diagnostic.empty() && !g.json_lines) std::cerr << r.diagnostic << "\n";
    return finish(g, r.ok, "audit");
}

int cmd_extract(const Globals& g, const Address& addr, const fs::path& record_path, const fs::path& out) {
    const auto rec = load_client_record(record_path);
    std::optional<Bytes> data;
    std::string report;
    if (rec.dynamic) {
        const DynClient client(rec.field, *rec.dynamic);
        Session s(addr);
        RemoteDynStore store(s, rec.file_id);
        data = client.extract_bytes(store);
        if (!data) report = client.extract(store).report();
    } else {
        const auto k = load_keys(g);
        auto rng = g.rng();
        ExtractionPolicy policy;
        policy.rho = rec.manifest->code().rate();
        auto r = client_extract(addr, *rec.manifest, k.keys, k.group, policy, rng);
        data = std::move(r.data);
        if (!data) report = r.report();
    }
    if (!data) {
        g.emit({{"command", "extract"}, {"result", "FAIL"}, {"report", report}}, "FAIL\n" + report);
        return kFailed;
    }
    write_whole_file(out, *data);
    g.emit({{"command", "extract"}, {"result", "PASS"}, {"bytes", data->size()}, {"out", out.string()}},
           "recovered " + std::to_string(data->size()) + " bytes to " + out.string());
    return kOk;
}

DynClient dynamic_client(const ClientRecord& rec) {
    if (!rec.dynamic) throw UsageError("read and write need a dynamic file");
    return DynClient(rec.field, *rec.dynamic);
}

int cmd_read(const Globals& g, const Address& addr, const fs::path& record_path, std::uint64_t index) {
    const auto rec = load_client_record(record_path);
    auto client = dynamic_client(rec);
    const auto block = client_read(addr, rec.file_id, client, index);
    const auto width = rec.field->payload_bytes();
    Bytes payload;
    for (const auto& e : block) {
        const auto p = e.to_payload(width);
        payload.insert(payload.end(), p.begin(), p.end());
    }
    g.emit({{"command", "read"}, {"index", index}, {"hex", to_hex(payload)}}, to_hex(payload));
    return kOk;
}

int cmd_write(const Globals& g, const Address& addr, const fs::path& record_path, std::uint64_t index,
              const std::string& hex, const std::string& text) {
    if (hex.empty() == text.empty()) throw UsageError("give exactly one of --hex or --text");
    auto rec = load_client_record(record_path);
    auto client = dynamic_client(rec);
    const auto data = hex.empty() ? Bytes(text.begin(), text.end()) : load_local("hex", [&] { return from_hex(hex); });
    const auto width = rec.field->payload_bytes();
    const auto beta = rec.dynamic->params.beta;
    if (data.size() > width * beta) {
        throw UsageError("a block holds at most " + std::to_string(width * beta) + " bytes");
    }
    DynBlock value;
    for (std::size_t b = 0; b < beta; ++b) {
        const auto lo = std::min(data.size(), b * width);
        const auto hi = std::min(data.size(), lo + width);
        Bytes chunk(data.begin() + static_cast<std::ptrdiff_t>(lo), data.begin() + static_cast<std::ptrdiff_t>(hi));
        chunk.resize(width, 0);
        value.push_back(FieldElement::from_payload(rec.field, chunk));
    }
    client_write(addr, rec.file_id, client, index, value);
    rec.dynamic = client.state();
    save_record(record_path, rec);
    g.emit({{"command", "write"}, {"index", index}, {"writes", rec.dynamic->writes}},
           "wrote block " + std::to_string(index));
    return kOk;
}

int cmd_corrupt(const Globals& g, const fs::path& dir_flag, std::string id, const fs::path& record_path,
                const ServerBehavior& behavior) {
    if (std::holds_alternative<Replay>(behavior)) throw UsageError("replay is not a stored-data behavior");
    validate(behavior);
    if (id.empty()) {
        if (record_path.empty()) throw UsageError("give --id or --record");
        id = load_client_record(record_path).file_id;
    }
    const auto base = store_directory(dir_flag) / "files" / id;
    if (!fs::is_directory(base)) throw UsageError("no stored file " + id + " under " + base.parent_path().string());
    auto rng = g.rng();
    std::uint64_t damaged = 0;
    if (fs::exists(base / "meta")) {
        auto state = load_local("dynamic state", [&] { return DynServerState::load(base); });
        apply_behavior(state, behavior, rng);
        state.save(base);
    } else {
        const auto tags_path = base / "tags.dat";
        const auto tags = fs::exists(tags_path) ? read_whole_file(tags_path) : Bytes{};
        auto store = load_local("store", [&] {
            return TaggedFile::parse_lenient(read_whole_file(base / "blocks.dat"), tags, id);
        });
        const auto stripe = store.container.header.n;
        const auto apply = [&](double delta, Placement placement, bool erase) {
            auto sites = damage_sites(store.size(), delta, placement, stripe, rng);
            for (auto& s : sites) ++s;
            if (erase) {
                erase_blocks(store, sites);
            } else {
                corrupt_blocks(store, sites, rng);
            }
            damaged = sites.size();
        };
        if (const auto* e = std::get_if<EraseFraction>(&behavior)) apply(e->delta, e->placement, true);
        if (const auto* c = std::get_if<CorruptFraction>(&behavior)) apply(c->delta, c->placement, false);
        write_whole_file(base / "blocks.dat", store.container.serialize());
        write_whole_file(tags_path, store.serialize_tags());
    }
    g.emit({{"command", "corrupt"}, {"file_id", id}, {"behavior", behavior_name(behavior)}, {"blocks", damaged}},
           "applied " + behavior_name(behavior) + " to " + id);
    return kOk;
}

StorageServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->request_stop();
}

int cmd_serve(const Globals& g, const Address& addr, const fs::path& dir, std::uint32_t max_frame) {
    StorageServer server(store_directory(dir), ServerOptions{max_frame});
    server.bind(addr);
    g_server = &server;
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
    std::signal(SIGPIPE, SIG_IGN);
    const auto where = addr.host + ":" + std::to_string(server.port());
    g.emit({{"command", "serve"}, {"listen", where}, {"dir", server.directory().string()}},
           "listening on " + where + ", store " + server.directory().string());
    server.run();
    server.stop();
    g_server = nullptr;
    return kOk;
}

struct ExperimentArgs {
    std::vector<std::string> schemes{"sw-private"};
    std::vector<double> deltas{0.1};
    std::vector<std::uint64_t> ls{44};
    std::uint64_t trials = 2000;
    std::string behavior = "erase";
    std::string placement = "uniform";
    std::size_t window = 1;
    TrialSetup setup;
    std::size_t code_n = 16;
    std::size_t code_f = 8;
    bool extraction = false;
    std::size_t file_bytes = 65536;
};

int cmd_experiment(const Globals& g, ExperimentArgs a) {
    a.setup.code = CodeParams(a.code_n, a.code_f);
    for (const auto& s : a.schemes) {
        if (!is_experiment_scheme(s)) throw UsageError("unknown scheme " + s);
    }
    const auto behavior_for = [&](double delta) -> ServerBehavior {
        if (a.behavior == "honest") return Honest{};
        if (a.behavior == "replay") return Replay{a.window};
        if (a.behavior == "erase") return *damage_behavior(delta, std::nullopt, a.placement);
        if (a.behavior == "corrupt") return *damage_behavior(std::nullopt, delta, a.placement);
        throw UsageError("behavior must be honest, erase, corrupt or replay");
    };
    for (auto d : a.deltas) validate(behavior_for(d));
    auto rng = g.rng();
    if (a.extraction) {
        bool all = true;
        for (const auto& s : a.schemes) {
            for (auto d : a.deltas) {
                const auto r = extraction_experiment(s, behavior_for(d), a.file_bytes, a.trials, rng, a.setup);
                all = all && r.successes == r.trials;
                std::string text = r.scheme + " " + r.behavior + ": " + std::to_string(r.successes) + "/" +
                                   std::to_string(r.trials) + " recovered";
                if (!r.first_failure.empty()) text += "\n" + r.first_failure;
                g.emit(json::parse(r.json_line()), text);
            }
        }
        return all ? kOk : kFailed;
    }
    std::vector<ExperimentReport> reports;
    for (const auto& s : a.schemes) {
        for (auto d : a.deltas) {
            for (auto l : a.ls) {
                reports.push_back(detection_experiment(s, behavior_for(d), l, a.trials, rng, a.setup));
                if (g.json_lines) g.emit(json::parse(reports.back().json_line()), "");
            }
        }
    }
    if (!g.json_lines) std::cout << format_table(reports);
    return kOk;
}

int cmd_selftest(const Globals& g) {
    bool all = true;
    for (const auto& line : run_selftest()) {
        all = all && line.ok;
        g.emit({{"check", line.name}, {"result", line.ok ? "PASS" : "FAIL"}, {"detail", line.detail}},
               std::string(line.ok ? "PASS " : "FAIL ") + line.name + ": " + line.detail);
    }
    return all ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proofs of retrievability: set up, store, audit and recover files"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Deterministic randomness");
    app.add_flag("--json-lines", g.json_lines, "One JSON record per line");
    app.add_option("--keys", g.keys, "Key file (default: $POR_KEY_FILE, else por.key)");

    std::function<int()> run;
    std::string server = "127.0.0.1:7070";
    fs::path record;

    auto* keygen = app.add_subcommand("keygen", "Generate a key file");
    std::string scheme;
    unsigned bits = 256;
    keygen->add_option("--scheme", scheme, "jk-mac, jk-bls, sw-private, sw-public or sentinel")->required();
    keygen->add_option("--bits", bits, "Prime size in bits")->capture_default_str();
    keygen->callback([&] { run = [&] { return cmd_keygen(g, scheme, bits); }; });

    auto* setup = app.add_subcommand("setup", "Encode and tag a file locally");
    fs::path in, out;
    std::size_t code_n = 16, code_f = 8;
    std::uint64_t sentinels = 100;
    setup->add_option("--in", in, "Input file")->required();
    setup->add_option("--out", out, "Store file to write")->required();
    setup->add_option("--record", record, "Client record (default: <out>.record.json)");
    setup->add_option("--n", code_n, "Codeword length")->capture_default_str();
    setup->add_option("--f", code_f, "Message symbols per stripe")->capture_default_str();
    setup->add_option("--sentinels", sentinels, "Sentinel count (sentinel scheme)")->capture_default_str();
    setup->callback([&] { run = [&] { return cmd_setup(g, in, out, record, code_n, code_f, sentinels); }; });

    auto* upload = app.add_subcommand("upload", "Send a store file, or a new dynamic file, to a server");
    fs::path store_path;
    bool dynamic = false;
    std::uint64_t dyn_n = 256;
    std::size_t beta = 1;
    upload->add_option("--server", server, "host:port")->capture_default_str();
    upload->add_option("--store", store_path, "Store file from setup");
    upload->add_flag("--dynamic", dynamic, "Upload --in as a dynamic file");
    upload->add_option("--in", in, "Input file (dynamic)");
    upload->add_option("--record", record, "Client record to write (dynamic)");
    upload->add_option("--n", dyn_n, "Blocks (dynamic)")->capture_default_str();
    upload->add_option("--beta", beta, "Field elements per block (dynamic)")->capture_default_str();
    upload->add_option("--bits", bits, "Prime size in bits (dynamic)")->capture_default_str();
    upload->callback([&] {
        run = [&] {
            const auto addr = Address::parse(server);
            if (dynamic) {
                if (in.empty() || record.empty()) throw UsageError("--dynamic needs --in and --record");
                return cmd_upload_dynamic(g, addr, in, record, dyn_n, beta, bits);
            }
            if (store_path.empty()) throw UsageError("give --store or --dynamic");
            return cmd_upload(g, addr, store_path);
        };
    });

    auto* audit = app.add_subcommand("audit", "Challenge the server; prints PASS or FAIL");
    std::uint64_t l = 44, q = 10;
    audit->add_option("--server", server, "host:port")->capture_default_str();
    audit->add_option("--record", record, "Client record")->required();
    audit->add_option("-l", l, "Challenged blocks (samples per region for dynamic files)")->capture_default_str();
    audit->add_option("-q", q, "Sentinels spent per audit")->capture_default_str();
    audit->callback([&] { run = [&] { return cmd_audit(g, Address::parse(server), record, l, q); }; });

    auto* extract_cmd = app.add_subcommand("extract", "Recover the file from the server");
    extract_cmd->add_option("--server", server, "host:port")->capture_default_str();
    extract_cmd->add_option("--record", record, "Client record")->required();
    extract_cmd->add_option("--out", out, "Output file")->required();
    extract_cmd->callback([&] { run = [&] { return cmd_extract(g, Address::parse(server), record, out); }; });

    auto* read = app.add_subcommand("read", "Read one block of a dynamic file (hex)");
    std::uint64_t index = 0;
    read->add_option("--server", server, "host:port")->capture_default_str();
    read->add_option("--record", record, "Client record")->required();
    read->add_option("-i,--index", index, "1-based block index")->required();
    read->callback([&] { run = [&] { return cmd_read(g, Address::parse(server), record, index); }; });

    auto* write = app.add_subcommand("write", "Overwrite one block of a dynamic file");
    std::string hex, text;
    write->add_option("--server", server, "host:port")->capture_default_str();
    write->add_option("--record", record, "Client record")->required();
    write->add_option("-i,--index", index, "1-based block index")->required();
    write->add_option("--hex", hex, "Block content as hex");
    write->add_option("--text", text, "Block content as text");
    write->callback([&] { run = [&] { return cmd_write(g, Address::parse(server), record, index, hex, text); }; });

    auto* corrupt = app.add_subcommand("corrupt", "Damage a file in a server's store directory");
    fs::path dir = "por-store";
    std::string id;
    std::optional<double> erase, garble;
    std::string placement = "uniform";
    corrupt->add_option("--dir", dir, "Store directory (default: $POR_STORE_DIR, else por-store)");
    corrupt->add_option("--id", id, "File id");
    corrupt->add_option("--record", record, "Client record naming the file");
    corrupt->add_option("--erase", erase, "Fraction of blocks to erase");
    corrupt->add_option("--corrupt", garble, "Fraction of blocks to overwrite with random values");
    corrupt->add_option("--placement", placement, "uniform, targeted or per-stripe")->capture_default_str();
    corrupt->callback([&] {
        run = [&] {
            const auto b = damage_behavior(erase, garble, placement);
            if (!b) throw UsageError("give --erase or --corrupt");
            return cmd_corrupt(g, dir, id, record, *b);
        };
    });

    auto* serve = app.add_subcommand("serve", "Run the storage server");
    std::string listen = "127.0.0.1:7070";
    std::uint32_t max_frame = wire::kDefaultMaxFrame;
    serve->add_option("--listen", listen, "host:port")->capture_default_str();
    serve->add_option("--dir", dir, "Store directory (default: $POR_STORE_DIR, else por-store)");
    serve->add_option("--max-frame", max_frame, "Largest accepted frame in bytes")->capture_default_str();
    serve->callback([&] { run = [&] { return cmd_serve(g, Address::parse(listen), dir, max_frame); }; });

    auto* experiment = app.add_subcommand("experiment", "Detection or extraction rates against a faulty server");
    ExperimentArgs ex;
    experiment->add_option("--scheme", ex.schemes, "Schemes, or dynamic")->capture_default_str();
    experiment->add_option("--delta", ex.deltas, "Damaged fractions")->capture_default_str();
    experiment->add_option("-l", ex.ls, "Challenge sizes")->capture_default_str();
    experiment->add_option("--trials", ex.trials, "Trials per configuration")->capture_default_str();
    experiment->add_option("--behavior", ex.behavior, "honest, erase, corrupt or replay")->capture_default_str();
    experiment->add_option("--placement", ex.placement, "uniform, targeted or per-stripe")->capture_default_str();
    experiment->add_option("--window", ex.window, "Replay window")->capture_default_str();
    experiment->add_option("--blocks", ex.setup.blocks, "Blocks per store")->capture_default_str();
    experiment->add_option("--n", ex.code_n, "Codeword length")->capture_default_str();
    experiment->add_option("--f", ex.code_f, "Message symbols per stripe")->capture_default_str();
    experiment->add_option("--sentinels", ex.setup.sentinels, "Sentinels per store")->capture_default_str();
    experiment->add_flag("--extraction", ex.extraction, "Measure extraction instead of detection");
    experiment->add_option("--file-bytes", ex.file_bytes, "File size for extraction")->capture_default_str();
    experiment->callback([&] { run = [&] { return cmd_experiment(g, ex); }; });

    auto* selftest = app.add_subcommand("selftest", "Check the published test vectors");
    selftest->callback([&] { run = [&] { return cmd_selftest(g); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    try {
        return run();
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kTransport;
    } catch (const IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return kFailed;
    } catch (const RemoteError& e) {
        std::cerr << "server error: " << e.what() << "\n";
        return kFailed;
    } catch (const DecodeError& e) {
        std::cerr << "bad reply: " << e.what() << "\n";
        return kFailed;
    } catch (const BudgetExhausted& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
