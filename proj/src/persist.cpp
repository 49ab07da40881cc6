#include "iflow/persist.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "iflow/serde.hpp"

namespace iflow {

namespace {

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
}

void put_tensor(std::string& out, const std::string& name,
                const std::vector<int64_t>& shape, const std::vector<float>& data) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.append(name);
    put_u32(out, static_cast<uint32_t>(shape.size()));
    int64_t numel = 1;
    for (int64_t d : shape) {
        put_u64(out, static_cast<uint64_t>(d));
        numel *= d;
    }
    if (numel != static_cast<int64_t>(data.size()))
        throw IoError("checkpoint: tensor '" + name + "' shape does not match payload");
    for (float f : data) put_f32(out, f);
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n, const char* what) {
        if (pos + n > buf.size())
            throw CorruptionError("checkpoint truncated at offset " + std::to_string(pos) +
                                  " while reading " + what);
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64(const char* what) {
        need(8, what);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    std::string bytes(size_t n, const char* what) {
        need(n, what);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    std::vector<float> f32s(size_t n, const char* what) {
        need(4 * n, what);
        std::vector<float> v(n);
        for (size_t i = 0; i < n; ++i) {
            uint32_t bits = 0;
            for (int b = 0; b < 4; ++b)
                bits |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + 4 * i + b]))
                        << (8 * b);
            std::memcpy(&v[i], &bits, 4);
        }
        pos += 4 * n;
        return v;
    }
};

struct RawTensor {
    std::string name;
    std::vector<int64_t> shape;
    std::vector<float> data;
};

}  // namespace

void save_checkpoint(const TrainState& state, const std::string& path) {
    json meta;
    meta["process"] = to_json(state.spec);
    meta["net"] = to_json(state.params.config);
    meta["train"] = to_json(state.cfg);
    meta["step"] = state.step;
    meta["seed"] = state.cfg.seed;
    meta["streams"] = json{{"data", state.data_stream.counter()},
                           {"noise", state.noise_stream.counter()},
                           {"init", state.init_stream.counter()},
                           {"buffer_init", state.buffer_init_stream.counter()}};
    meta["buffer"] = json{{"epoch", state.buffer.epoch},
                          {"processed", state.buffer.processed},
                          {"count", state.buffer.count()},
                          {"dim", state.buffer.dim}};
    std::string meta_str = meta.dump();

    std::string out;
    out.reserve(meta_str.size() + 4096);
    out.append("IFCK");
    put_u32(out, CHECKPOINT_VERSION);
    put_u64(out, meta_str.size());
    out.append(meta_str);

    uint64_t tensor_count = 3 * state.params.tensors.size() + state.opt_m.size() + 1 +
                            (state.buffer.staged.empty() ? 0 : 2);
    put_u64(out, tensor_count);
    for (const Tensor& t : state.params.tensors) put_tensor(out, "param." + t.name, t.shape, t.data);
    for (const Tensor& t : state.ema_params.tensors) put_tensor(out, "ema." + t.name, t.shape, t.data);
    for (size_t i = 0; i < state.opt_m.size(); ++i)
        put_tensor(out, "opt.m." + state.params.tensors[i].name,
                   state.params.tensors[i].shape, state.opt_m[i]);
    for (size_t i = 0; i < state.opt_v.size(); ++i)
        put_tensor(out, "opt.v." + state.params.tensors[i].name,
                   state.params.tensors[i].shape, state.opt_v[i]);
    put_tensor(out, "buffer.values", {state.buffer.count(), state.buffer.dim},
               state.buffer.values);
    if (!state.buffer.staged.empty()) {
        std::vector<float> ids, vals;
        for (const auto& [id, v] : state.buffer.staged) {
            if (id >= (1LL << 24))
                throw IoError("checkpoint: staged id exceeds exact fp32 range");
            ids.push_back(static_cast<float>(id));
            vals.insert(vals.end(), v.begin(), v.end());
        }
        put_tensor(out, "buffer.staged_ids",
                   {static_cast<int64_t>(ids.size())}, ids);
        put_tensor(out, "buffer.staged_values",
                   {static_cast<int64_t>(ids.size()), state.buffer.dim}, vals);
    }

    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("checkpoint: cannot open '" + tmp.string() + "' for writing");
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        f.flush();
        if (!f) throw IoError("checkpoint: write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw IoError("checkpoint: rename to '" + path + "' failed: " + ec.message());
}

TrainState load_checkpoint(const std::string& path) {
    std::string buf;
    {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError("checkpoint: cannot open '" + path + "'");
        buf.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    Reader r{buf};
    std::string magic = r.bytes(4, "magic");
    if (magic != "IFCK") throw CorruptionError("checkpoint: bad magic (not an IFCK file)");
    uint32_t version = r.u32("version");
    if (version != CHECKPOINT_VERSION)
        throw UnsupportedVersionError("checkpoint: unsupported version " +
                                      std::to_string(version) + " (expected " +
                                      std::to_string(CHECKPOINT_VERSION) + ")");
    uint64_t meta_len = r.u64("metadata length");
    std::string meta_str = r.bytes(meta_len, "metadata");
    json meta;
    try {
        meta = json::parse(meta_str);
    } catch (const json::exception& e) {
        throw CorruptionError(std::string("checkpoint: metadata is not valid JSON: ") + e.what());
    }

    TrainState st;
    try {
        st.spec = process_from_json(meta.at("process"));
        st.params.config = net_from_json(meta.at("net"));
        st.cfg = train_from_json(meta.at("train"));
        st.step = meta.at("step").get<int64_t>();
        const json& streams = meta.at("streams");
        uint64_t seed = st.cfg.seed;
        st.data_stream = RngStream(seed, StreamPurpose::TrainData);
        st.data_stream.set_counter(streams.at("data").get<uint64_t>());
        st.noise_stream = RngStream(seed, StreamPurpose::TrainNoise);
        st.noise_stream.set_counter(streams.at("noise").get<uint64_t>());
        st.init_stream = RngStream(seed, StreamPurpose::ParamInit);
        st.init_stream.set_counter(streams.at("init").get<uint64_t>());
        st.buffer_init_stream = RngStream(seed, StreamPurpose::BufferInit);
        st.buffer_init_stream.set_counter(streams.at("buffer_init").get<uint64_t>());
        st.buffer.epoch = meta.at("buffer").at("epoch").get<int64_t>();
        st.buffer.processed = meta.at("buffer").at("processed").get<int64_t>();
        st.buffer.dim = meta.at("buffer").at("dim").get<int64_t>();
    } catch (const json::exception& e) {
        throw CorruptionError(std::string("checkpoint: metadata missing fields: ") + e.what());
    }

    uint64_t tensor_count = r.u64("tensor count");
    std::vector<RawTensor> raw(tensor_count);
    for (uint64_t i = 0; i < tensor_count; ++i) {
        uint32_t name_len = r.u32("tensor name length");
        raw[i].name = r.bytes(name_len, "tensor name");
        uint32_t rank = r.u32("tensor rank");
        int64_t numel = 1;
        for (uint32_t d = 0; d < rank; ++d) {
            raw[i].shape.push_back(static_cast<int64_t>(r.u64("tensor dim")));
            numel *= raw[i].shape.back();
        }
        if (numel < 0 || numel > (1LL << 33))
            throw CorruptionError("checkpoint: implausible tensor size for '" + raw[i].name + "'");
        raw[i].data = r.f32s(static_cast<size_t>(numel), "tensor payload");
    }
    if (r.pos != buf.size())
        throw CorruptionError("checkpoint: " + std::to_string(buf.size() - r.pos) +
                              " trailing bytes after tensor section");

    auto find = [&](const std::string& name) -> RawTensor& {
        for (RawTensor& t : raw)
            if (t.name == name) return t;
        throw CorruptionError("checkpoint: missing tensor '" + name + "'");
    };

    // Rebuild the layer layout from the config, then verify shapes against it.
    RngStream dummy(0, StreamPurpose::ParamInit);
    NetworkParams skeleton = init_params(st.params.config, dummy);
    st.params.tensors = skeleton.tensors;
    st.params.step_count = st.step;
    st.ema_params = st.params;
    st.opt_m.resize(st.params.tensors.size());
    st.opt_v.resize(st.params.tensors.size());
    for (size_t i = 0; i < st.params.tensors.size(); ++i) {
        const std::string& base = st.params.tensors[i].name;
        for (const char* prefix : {"param.", "ema.", "opt.m.", "opt.v."}) {
            RawTensor& t = find(prefix + base);
            if (t.shape != st.params.tensors[i].shape)
                throw CorruptionError("checkpoint: tensor '" + t.name +
                                      "' shape disagrees with the net config");
        }
        st.params.tensors[i].data = find("param." + base).data;
        st.ema_params.tensors[i].data = find("ema." + base).data;
        st.opt_m[i] = find("opt.m." + base).data;
        st.opt_v[i] = find("opt.v." + base).data;
    }
    st.ema_params.step_count = st.step;

    RawTensor& bv = find("buffer.values");
    if (bv.shape.size() != 2 || bv.shape[1] != st.buffer.dim)
        throw CorruptionError("checkpoint: buffer.values shape disagrees with metadata");
    st.buffer.values = bv.data;
    int64_t expect_count = meta.at("buffer").at("count").get<int64_t>();
    if (st.buffer.count() != expect_count)
        throw CorruptionError("checkpoint: buffer.values count disagrees with metadata");

    for (RawTensor& t : raw) {
        if (t.name == "buffer.staged_ids") {
            RawTensor& vals = find("buffer.staged_values");
            if (vals.shape.size() != 2 ||
                vals.shape[0] != static_cast<int64_t>(t.data.size()) ||
                vals.shape[1] != st.buffer.dim)
                throw CorruptionError("checkpoint: staged tensor shapes disagree");
            for (size_t i = 0; i < t.data.size(); ++i) {
                int64_t id = static_cast<int64_t>(t.data[i]);
                std::vector<float> v(vals.data.begin() + i * st.buffer.dim,
                                     vals.data.begin() + (i + 1) * st.buffer.dim);
                st.buffer.staged[id] = std::move(v);
            }
        }
    }
    return st;
}

}  // namespace iflow
