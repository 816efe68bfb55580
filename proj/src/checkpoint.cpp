#include "hifnet/checkpoint.hpp"

#include "hifnet/binary_io.hpp"
#include "hifnet/config.hpp"
#include "hifnet/errors.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace hifnet::nn {

namespace {

constexpr std::array<std::uint8_t, 4> kCheckpointMagic{'H', 'I', 'F', 'C'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8;
// epochs, two losses, dataset seed, init seed, spec length prefix
constexpr std::size_t kMetadataMinBytes = 4 + 8 + 8 + 8 + 8 + 4;

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

} // namespace

Checkpoint make_checkpoint(const Model& model, const TrainingMetadata& metadata) {
    Checkpoint c;
    c.architecture_fingerprint = fingerprint(model.spec());
    c.spec = model.spec();
    c.init_seed = model.init_seed();
    c.parameters = model.flat_parameters();
    c.metadata = metadata;
    return c;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    io::ByteWriter w;
    w.put_bytes(kCheckpointMagic);
    w.put_u32(ckpt.format_version);
    w.put_u64(ckpt.architecture_fingerprint);
    w.put_u64(ckpt.parameters.size());
    for (double v : ckpt.parameters) {
        w.put_f64(v);
    }
    w.put_u32(ckpt.metadata.epochs_trained);
    w.put_f64(ckpt.metadata.final_train_loss);
    w.put_f64(ckpt.metadata.final_val_loss);
    w.put_u64(ckpt.metadata.dataset_seed);
    w.put_u64(ckpt.init_seed);
    w.put_string(config::to_json(ckpt.spec).dump());
    w.seal();
    return w.bytes();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin())) {
        throw DataError("not a checkpoint file (bad magic)");
    }
    io::ByteReader header(bytes.subspan(4));
    Checkpoint c;
    c.format_version = header.get_u32();
    if (c.format_version != kCheckpointFormatVersion) {
        throw VersionError("unsupported checkpoint format version " + std::to_string(c.format_version));
    }
    c.architecture_fingerprint = header.get_u64();
    const auto count = header.get_u64();
    const std::size_t minimum = kHeaderBytes + 8 * count + kMetadataMinBytes + 4;
    if (bytes.size() < minimum) {
        throw TruncatedError("checkpoint truncated: " + std::to_string(bytes.size()) + " bytes, need at least " +
                             std::to_string(minimum));
    }
    const auto payload = io::verify_sealed(bytes);

    io::ByteReader r(payload.subspan(kHeaderBytes));
    c.parameters.resize(count);
    for (double& v : c.parameters) {
        v = r.get_f64();
    }
    c.metadata.epochs_trained = r.get_u32();
    c.metadata.final_train_loss = r.get_f64();
    c.metadata.final_val_loss = r.get_f64();
    c.metadata.dataset_seed = r.get_u64();
    c.init_seed = r.get_u64();
    const auto spec_text = r.get_string();
    if (r.remaining() != 0) {
        throw DataError("checkpoint has trailing bytes after metadata");
    }
    try {
        c.spec = config::model_spec_from_json(config::json::parse(spec_text));
    } catch (const config::json::exception& e) {
        throw DataError(std::string("checkpoint spec block is not valid JSON: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint spec block is invalid: ") + e.what());
    }
    if (fingerprint(c.spec) != c.architecture_fingerprint) {
        throw FingerprintError("checkpoint fingerprint " + hex(c.architecture_fingerprint) +
                               " does not match its embedded spec (" + hex(fingerprint(c.spec)) + ")");
    }
    if (parameter_count(c.spec) != c.parameters.size()) {
        throw FingerprintError("checkpoint carries " + std::to_string(c.parameters.size()) +
                               " parameters, its spec needs " + std::to_string(parameter_count(c.spec)));
    }
    return c;
}

void save_checkpoint(const Model& model, const TrainingMetadata& metadata, const std::filesystem::path& path) {
    io::write_file(path, encode_checkpoint(make_checkpoint(model, metadata)));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

Model model_from_checkpoint(const Checkpoint& ckpt) { return restore_for_transfer(ckpt, ckpt.spec); }

Model restore_for_transfer(const Checkpoint& ckpt, const ModelSpec& target_spec) {
    const auto target = fingerprint(target_spec);
    if (target != ckpt.architecture_fingerprint) {
        throw FingerprintError("checkpoint architecture " + hex(ckpt.architecture_fingerprint) + " (" +
                               canonical_string(ckpt.spec) + ") does not match target " + hex(target) + " (" +
                               canonical_string(target_spec) + ")");
    }
    Model m = Model::build(target_spec, ckpt.init_seed);
    m.set_flat_parameters(ckpt.parameters);
    return m;
}

} // namespace hifnet::nn
