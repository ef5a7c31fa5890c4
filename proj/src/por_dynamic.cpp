#include "por/por_dynamic.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "por/error.hpp"

namespace por {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

Bytes encode_elements(std::span<const FieldElement> xs) {
    ByteWriter w;
    for (const auto& x : xs) x.write(w);
    return std::move(w).take();
}

/// Fixed-width parse of `count` elements; throws DecodeError on a bad leaf.
std::vector<FieldElement> decode_elements(const FieldPtr& field, ByteView leaf, std::size_t count) {
    if (leaf.size() != count * field->byte_width()) throw DecodeError("leaf has wrong length");
    ByteReader r(leaf);
    std::vector<FieldElement> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(FieldElement::read(field, r));
    return out;
}

std::string digest_hex(const Digest& d) { return to_hex(d); }

Bytes read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& p, ByteView data) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, p);
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t DynParams::levels() const {
    std::size_t lg = 0;
    while ((std::uint64_t{1} << lg) < n) ++lg;
    return lg + 2;
}

CodeParams DynParams::c_code_or_default() const {
    if (c_code.n != 0) return c_code;
    const auto k = static_cast<std::size_t>(std::min<std::uint64_t>(64, n * beta));
    return {2 * k, k};
}

std::uint64_t DynParams::c_stripes() const {
    const auto f = c_code_or_default().f;
    return (n * beta + f - 1) / f;
}

std::vector<Bytes> dyn_encode_c(const FieldPtr& field, const DynParams& params, const std::vector<DynBlock>& u) {
    std::vector<FieldElement> flat;
    flat.reserve(u.size() * params.beta);
    for (const auto& b : u) flat.insert(flat.end(), b.begin(), b.end());
    const auto code = params.c_code_or_default();
    ReedSolomon<PrimeCodeField> rs(PrimeCodeField(field), code);
    auto striped = stripe_blocks<FieldElement>(flat, code.f, FieldElement::zero(field));
    std::vector<Bytes> out;
    out.reserve(striped.stripes.size() * code.n);
    for (const auto& s : striped.stripes) {
        for (const auto& sym : rs.encode(s).symbols) out.push_back(sym.to_bytes());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Server

DynServerState::Structure DynServerState::build(std::vector<Bytes> leaves) {
    auto tree = MerkleTree(leaves);
    return {std::move(leaves), std::move(tree)};
}

DynServerState::DynServerState(FieldPtr field, DynParams params, std::vector<Bytes> u, std::vector<Bytes> c)
    : field_(std::move(field)), params_(params), u_(build(std::move(u))), c_(build(std::move(c))) {
    if (u_.leaves.size() != params_.n) throw UsageError("U must hold n blocks");
    h_.resize(params_.levels());
}

std::uint64_t DynServerState::occupancy() const {
    std::uint64_t bits = 0;
    for (std::size_t l = 0; l < h_.size(); ++l) {
        if (h_[l]) bits |= std::uint64_t{1} << l;
    }
    return bits;
}

DynServerState::Structure& DynServerState::structure(DynRegion region, std::size_t level) {
    switch (region) {
        case DynRegion::u: return u_;
        case DynRegion::c: return c_;
        case DynRegion::h:
            if (level >= h_.size() || !h_[level]) throw UsageError("H level " + std::to_string(level) + " is empty");
            return *h_[level];
    }
    throw UsageError("unknown region");
}

std::vector<std::optional<DynSymbol>> DynServerState::fetch(DynRegion region, std::size_t level,
                                                            std::span<const std::uint64_t> positions) {
    std::vector<std::optional<DynSymbol>> out(positions.size());
    if (region == DynRegion::h && !level_full(level)) return out;
    auto& s = structure(region, level);
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const auto p = positions[k];
        if (p >= s.leaves.size() || s.leaves[p].empty()) continue;
        out[k] = DynSymbol{s.leaves[p], s.tree.prove(p)};
    }
    return out;
}

std::vector<Bytes> DynServerState::fetch_all(DynRegion region, std::size_t level) {
    if (region == DynRegion::h && !level_full(level)) return {};
    return structure(region, level).leaves;
}

DynSymbol DynServerState::write_u(std::uint64_t i, const Bytes& leaf) {
    if (i >= u_.leaves.size()) throw UsageError("U index out of range");
    DynSymbol old{u_.leaves[i], u_.tree.prove(i)};
    u_.leaves[i] = leaf;
    u_.tree.update(i, leaf);
    return old;
}

void DynServerState::put_level(std::size_t level, const std::vector<Bytes>& symbols) {
    if (level >= h_.size()) throw UsageError("H level out of range");
    if (symbols.size() != (std::size_t{2} << level)) throw UsageError("level has wrong symbol count");
    h_[level] = build(symbols);
    for (std::size_t k = 0; k < level; ++k) h_[k].reset();
    ++w_;
}

void DynServerState::put_c(const std::vector<Bytes>& symbols) {
    if (symbols.size() != params_.c_symbols()) throw UsageError("C has wrong symbol count");
    c_ = build(symbols);
    for (auto& l : h_) l.reset();
    w_ = 0;
}

std::vector<Bytes>& DynServerState::raw(DynRegion region, std::size_t level) { return structure(region, level).leaves; }

namespace {

Container leaves_container(const FieldPtr& field, const std::vector<Bytes>& leaves, std::size_t width,
                           CodeParams code, std::uint64_t stripes, std::uint64_t extra) {
    Container c;
    c.field = field;
    c.header.prime = field->modulus();
    c.header.f = static_cast<std::uint32_t>(code.f);
    c.header.n = static_cast<std::uint32_t>(code.n);
    c.header.stripes = stripes;
    c.header.symbol_width = static_cast<std::uint16_t>(width);
    c.header.extra_symbols = extra;
    c.elements.reserve(leaves.size() * width);
    for (const auto& leaf : leaves) {
        std::vector<FieldElement> xs;
        try {
            xs = decode_elements(field, leaf, width);
        } catch (const DecodeError&) {
            xs.assign(width, FieldElement::zero(field));
        }
        c.elements.insert(c.elements.end(), xs.begin(), xs.end());
    }
    return c;
}

std::vector<Bytes> container_leaves(const Container& c) {
    const std::size_t width = c.header.symbol_width;
    std::vector<Bytes> out;
    out.reserve(c.elements.size() / width);
    for (std::size_t i = 0; i < c.elements.size(); i += width) {
        out.push_back(encode_elements(std::span(c.elements).subspan(i, width)));
    }
    return out;
}

}  // namespace

void DynServerState::save(const fs::path& dir) const {
    fs::create_directories(dir / "H");
    const auto code = params_.c_code_or_default();
    write_file(dir / "U.dat", leaves_container(field_, u_.leaves, params_.beta, code, 0, params_.n).serialize());
    write_file(dir / "C.dat",
               leaves_container(field_, c_.leaves, 1, code, params_.c_stripes(), 0).serialize());
    json levels = json::array();
    for (std::size_t l = 0; l < h_.size(); ++l) {
        const auto path = dir / "H" / ("level-" + std::to_string(l) + ".dat");
        if (!h_[l]) {
            fs::remove(path);
            continue;
        }
        const std::size_t k = std::size_t{1} << l;
        write_file(path, leaves_container(field_, h_[l]->leaves, 2 + params_.beta, {2 * k, k}, 1, 0).serialize());
        levels.push_back(l);
    }
    json roots = {{"U", digest_hex(u_.tree.root())}, {"C", digest_hex(c_.tree.root())}};
    for (std::size_t l = 0; l < h_.size(); ++l) {
        if (h_[l]) roots["H" + std::to_string(l)] = digest_hex(h_[l]->tree.root());
    }
    json meta = {{"n", params_.n},         {"beta", params_.beta}, {"c_f", code.f}, {"c_n", code.n},
                 {"w", w_},                {"levels", levels},     {"roots", roots},
                 {"p", field_->modulus().get_str()}};
    const auto text = meta.dump(2);
    write_file(dir / "meta", as_bytes(text));
}

DynServerState DynServerState::load(const fs::path& dir) {
    json meta;
    try {
        auto text = read_file(dir / "meta");
        meta = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw DecodeError(std::string("bad dynamic meta: ") + e.what());
    }
    DynParams params;
    try {
        params.n = meta.at("n").get<std::uint64_t>();
        params.beta = meta.at("beta").get<std::size_t>();
        params.c_code = CodeParams(meta.at("c_n").get<std::size_t>(), meta.at("c_f").get<std::size_t>());
    } catch (const json::exception& e) {
        throw DecodeError(std::string("bad dynamic meta: ") + e.what());
    }
    auto u = Container::parse(read_file(dir / "U.dat"));
    auto c = Container::parse(read_file(dir / "C.dat"));
    DynServerState s(u.field, params, container_leaves(u), container_leaves(c));
    for (const auto& l : meta.at("levels")) {
        const auto level = l.get<std::size_t>();
        if (level >= s.h_.size()) throw DecodeError("level out of range");
        auto h = Container::parse(read_file(dir / "H" / ("level-" + std::to_string(level) + ".dat")));
        s.h_[level] = build(container_leaves(h));
    }
    s.w_ = meta.at("w").get<std::uint64_t>();
    return s;
}

// ---------------------------------------------------------------------------
// Client

std::string DynExtraction::report() const {
    std::ostringstream out;
    if (blocks) {
        out << "recovered " << blocks->size() << " blocks";
        return out.str();
    }
    out << deficient.size() << " codeword(s) unrecoverable";
    for (const auto& d : deficient) {
        out << "\n  ";
        if (d.region == DynRegion::c) {
            out << "C stripe " << d.stripe;
        } else {
            out << "H level " << d.level;
        }
        out << ": " << d.valid << " valid of " << d.required << " required";
    }
    return out.str();
}

DynClient::DynClient(FieldPtr field, DynClientState state) : field_(std::move(field)), state_(std::move(state)) {
    if (state_.level_roots.size() != state_.params.levels()) state_.level_roots.resize(state_.params.levels());
}

Bytes DynClient::encode_block(const DynBlock& b) const { return encode_elements(b); }

DynBlock DynClient::decode_block(ByteView leaf) const { return decode_elements(field_, leaf, state_.params.beta); }

std::pair<DynClient, DynServerState> DynClient::init(ByteView file, const FieldPtr& field, DynParams params) {
    if (params.n == 0 || params.beta == 0) throw UsageError("n and beta must be positive");
    if (file.empty()) throw UsageError("cannot initialize from an empty file");
    auto elements = bytes_to_blocks(field, file);
    if (elements.size() > params.n * params.beta) {
        throw UsageError("file needs " + std::to_string(elements.size()) + " elements; capacity is " +
                         std::to_string(params.n * params.beta));
    }
    params.c_code = params.c_code_or_default();
    elements.resize(params.n * params.beta, FieldElement::zero(field));

    std::vector<DynBlock> u;
    std::vector<Bytes> leaves;
    u.reserve(params.n);
    for (std::uint64_t i = 0; i < params.n; ++i) {
        u.emplace_back(elements.begin() + static_cast<std::ptrdiff_t>(i * params.beta),
                       elements.begin() + static_cast<std::ptrdiff_t>((i + 1) * params.beta));
        leaves.push_back(encode_elements(u.back()));
    }
    auto c = dyn_encode_c(field, params, u);

    DynClientState st;
    st.params = params;
    st.original_length = file.size();
    st.u_root = MerkleTree(leaves).root();
    st.c_root = MerkleTree(c).root();
    st.level_roots.resize(params.levels());
    DynClient client(field, std::move(st));
    DynServerState server(field, params, std::move(leaves), std::move(c));
    return {std::move(client), std::move(server)};
}

std::uint64_t DynClient::occupancy() const {
    std::uint64_t bits = 0;
    for (std::size_t l = 0; l < state_.level_roots.size(); ++l) {
        if (state_.level_roots[l]) bits |= std::uint64_t{1} << l;
    }
    return bits;
}

DynBlock DynClient::read(DynStore& server, std::uint64_t i) {
    if (i == 0 || i > state_.params.n) throw UsageError("read index " + std::to_string(i) + " out of range");
    const std::uint64_t pos = i - 1;
    auto got = server.fetch(DynRegion::u, 0, std::span(&pos, 1));
    if (got.size() != 1 || !got[0]) throw IntegrityError("server withheld block " + std::to_string(i));
    if (!merkle_verify(state_.u_root, pos, got[0]->leaf, got[0]->path)) {
        throw IntegrityError("block " + std::to_string(i) + " failed authentication");
    }
    return decode_block(got[0]->leaf);
}

void DynClient::write(DynStore& server, std::uint64_t i, const DynBlock& value) {
    if (i == 0 || i > state_.params.n) throw UsageError("write index " + std::to_string(i) + " out of range");
    if (value.size() != state_.params.beta) throw UsageError("block must hold beta field elements");
    for (const auto& x : value) {
        if (!(*x.field() == *field_)) throw UsageError("block element from another field");
    }
    const auto leaf = encode_block(value);
    auto old = server.write_u(i - 1, leaf);
    if (!merkle_verify(state_.u_root, i - 1, old.leaf, old.path)) {
        throw IntegrityError("previous block " + std::to_string(i) + " failed authentication");
    }
    state_.u_root = *merkle_root_from_path(i - 1, leaf, old.path);
    ++state_.writes;
    cascade(server, {i, value, ++state_.seq});
}

const ReedSolomon<PrimeCodeField>& DynClient::level_code(std::size_t l) const {
    auto& slot = level_codes_[l];
    if (!slot) {
        const std::size_t k = std::size_t{1} << l;
        slot = std::make_shared<ReedSolomon<PrimeCodeField>>(PrimeCodeField(field_), CodeParams{2 * k, k});
    }
    return *slot;
}

std::vector<Bytes> DynClient::encode_level(std::size_t l, const std::vector<WriteRecord>& records) const {
    const std::size_t k = std::size_t{1} << l;
    if (records.size() != k) throw UsageError("level needs exactly 2^l records");
    const std::size_t cols = 2 + state_.params.beta;
    const auto& code = level_code(l);
    std::vector<ByteWriter> symbols(2 * k);
    std::vector<FieldElement> column;
    for (std::size_t c = 0; c < cols; ++c) {
        column.clear();
        for (const auto& r : records) {
            if (c == 0) {
                column.emplace_back(field_, r.index);
            } else if (c == 1) {
                column.emplace_back(field_, r.seq);
            } else {
                column.push_back(r.value[c - 2]);
            }
        }
        auto cw = code.encode(column);
        for (std::size_t j = 0; j < 2 * k; ++j) cw.symbols[j].write(symbols[j]);
    }
    std::vector<Bytes> out;
    out.reserve(2 * k);
    for (auto& w : symbols) out.push_back(std::move(w).take());
    return out;
}

std::vector<WriteRecord> DynClient::decode_level(std::size_t l, const std::vector<std::optional<Bytes>>& symbols,
                                                 std::size_t& valid) const {
    const std::size_t k = std::size_t{1} << l;
    const std::size_t cols = 2 + state_.params.beta;
    std::vector<std::vector<FieldElement>> parsed(2 * k);
    std::vector<bool> present(2 * k, false);
    valid = 0;
    for (std::size_t j = 0; j < 2 * k && j < symbols.size(); ++j) {
        if (!symbols[j]) continue;
        try {
            parsed[j] = decode_elements(field_, *symbols[j], cols);
            present[j] = true;
            ++valid;
        } catch (const DecodeError&) {
        }
    }
    const auto& code = level_code(l);
    std::vector<WriteRecord> records(k);
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<FieldElement> syms;
        syms.reserve(2 * k);
        for (std::size_t j = 0; j < 2 * k; ++j) syms.push_back(present[j] ? parsed[j][c] : FieldElement::zero(field_));
        Codeword<FieldElement> cw(std::move(syms));
        cw.present = present;
        auto msg = code.decode(cw);
        for (std::size_t r = 0; r < k; ++r) {
            if (c == 0) {
                records[r].index = msg[r].to_u64();
            } else if (c == 1) {
                records[r].seq = msg[r].to_u64();
            } else {
                records[r].value.push_back(msg[r]);
            }
        }
    }
    return records;
}

void DynClient::cascade(DynStore& server, WriteRecord record) {
    std::size_t l = 0;
    while (l < state_.level_roots.size() && state_.level_roots[l]) ++l;
    if (l >= state_.level_roots.size()) throw Error("hierarchical log overflow");

    std::vector<WriteRecord> records;
    for (std::size_t k = 0; k < l; ++k) {
        auto leaves = server.fetch_all(DynRegion::h, k);
        if (leaves.size() != (std::size_t{2} << k) || MerkleTree(leaves).root() != *state_.level_roots[k]) {
            throw IntegrityError("H level " + std::to_string(k) + " failed authentication");
        }
        std::vector<std::optional<Bytes>> syms(leaves.begin(), leaves.end());
        std::size_t valid = 0;
        auto recs = decode_level(k, syms, valid);
        records.insert(records.end(), recs.begin(), recs.end());
    }
    records.push_back(std::move(record));
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });

    auto symbols = encode_level(l, records);
    state_.reencoded_symbols += symbols.size();
    server.put_level(l, symbols);
    state_.level_roots[l] = MerkleTree(symbols).root();
    for (std::size_t k = 0; k < l; ++k) state_.level_roots[k].reset();

    if (++state_.w == state_.params.n) rebuild_c(server);
}

void DynClient::rebuild_c(DynStore& server) {
    auto leaves = server.fetch_all(DynRegion::u, 0);
    if (leaves.size() != state_.params.n || MerkleTree(leaves).root() != state_.u_root) {
        throw IntegrityError("U failed authentication during rebuild");
    }
    std::vector<DynBlock> u;
    u.reserve(leaves.size());
    for (const auto& leaf : leaves) u.push_back(decode_block(leaf));
    auto c = dyn_encode_c(field_, state_.params, u);
    server.put_c(c);
    state_.c_root = MerkleTree(c).root();
    for (auto& r : state_.level_roots) r.reset();
    state_.w = 0;
    ++state_.c_rebuilds;
}

bool DynClient::audit(DynStore& server, std::size_t samples, Rng& rng) const {
    if (samples == 0) throw UsageError("audit needs at least one sample");
    auto check = [&](DynRegion region, std::size_t level, std::uint64_t size, const Digest& root) {
        std::vector<std::uint64_t> positions(samples);
        for (auto& p : positions) p = rng.uniform(size);
        auto got = server.fetch(region, level, positions);
        if (got.size() != positions.size()) return false;
        for (std::size_t k = 0; k < positions.size(); ++k) {
            if (!got[k] || !merkle_verify(root, positions[k], got[k]->leaf, got[k]->path)) return false;
        }
        return true;
    };
    if (!check(DynRegion::c, 0, state_.params.c_symbols(), state_.c_root)) return false;
    for (std::size_t l = 0; l < state_.level_roots.size(); ++l) {
        if (state_.level_roots[l] && !check(DynRegion::h, l, std::uint64_t{2} << l, *state_.level_roots[l])) {
            return false;
        }
    }
    return check(DynRegion::u, 0, state_.params.n, state_.u_root);
}

DynExtraction DynClient::extract(DynStore& server) const {
    DynExtraction result;
    auto authenticated = [&](DynRegion region, std::size_t level, std::uint64_t size, const Digest& root) {
        std::vector<std::uint64_t> positions(size);
        for (std::uint64_t p = 0; p < size; ++p) positions[p] = p;
        auto got = server.fetch(region, level, positions);
        std::vector<std::optional<Bytes>> out(size);
        for (std::uint64_t p = 0; p < size && p < got.size(); ++p) {
            if (got[p] && merkle_verify(root, p, got[p]->leaf, got[p]->path)) out[p] = std::move(got[p]->leaf);
        }
        return out;
    };

    // Snapshot from C.
    const auto& params = state_.params;
    const auto code = params.c_code_or_default();
    ReedSolomon<PrimeCodeField> rs(PrimeCodeField(field_), code);
    auto c = authenticated(DynRegion::c, 0, params.c_symbols(), state_.c_root);
    std::vector<FieldElement> flat;
    for (std::uint64_t s = 0; s < params.c_stripes(); ++s) {
        std::vector<FieldElement> syms;
        std::vector<bool> present(code.n, false);
        for (std::size_t j = 0; j < code.n; ++j) {
            const auto& leaf = c[s * code.n + j];
            if (leaf) {
                try {
                    syms.push_back(FieldElement::from_bytes(field_, *leaf));
                    present[j] = true;
                    continue;
                } catch (const DecodeError&) {
                }
            }
            syms.push_back(FieldElement::zero(field_));
        }
        Codeword<FieldElement> cw(std::move(syms));
        cw.present = present;
        const auto have = cw.present_count();
        if (have < code.f) {
            result.deficient.push_back({DynRegion::c, 0, static_cast<std::size_t>(s), have, code.f});
            continue;
        }
        auto msg = rs.decode(cw);
        flat.insert(flat.end(), msg.begin(), msg.end());
    }

    std::vector<WriteRecord> records;
    for (std::size_t l = 0; l < state_.level_roots.size(); ++l) {
        if (!state_.level_roots[l]) continue;
        auto syms = authenticated(DynRegion::h, l, std::uint64_t{2} << l, *state_.level_roots[l]);
        std::size_t valid = 0;
        try {
            auto recs = decode_level(l, syms, valid);
            records.insert(records.end(), recs.begin(), recs.end());
        } catch (const UnrecoverableError&) {
            result.deficient.push_back({DynRegion::h, l, 0, valid, std::size_t{1} << l});
        }
    }
    if (!result.deficient.empty()) return result;

    std::vector<DynBlock> blocks;
    blocks.reserve(params.n);
    for (std::uint64_t i = 0; i < params.n; ++i) {
        blocks.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i * params.beta),
                            flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * params.beta));
    }
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
    for (const auto& r : records) {
        if (r.index == 0 || r.index > params.n) continue;
        blocks[r.index - 1] = r.value;
    }
    result.blocks = std::move(blocks);
    return result;
}

std::optional<Bytes> DynClient::extract_bytes(DynStore& server) const {
    auto r = extract(server);
    if (!r.ok()) return std::nullopt;
    std::vector<FieldElement> flat;
    for (const auto& b : *r.blocks) flat.insert(flat.end(), b.begin(), b.end());
    return blocks_to_bytes(flat, state_.original_length);
}

}  // namespace por
