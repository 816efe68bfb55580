#include "hifnet/config.hpp"

#include "hifnet/errors.hpp"

#include <fstream>
#include <initializer_list>
#include <string>

namespace hifnet::config {

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const char* where) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (auto a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw ConfigError(std::string("unknown key '") + key + "' in " + where);
        }
    }
}

template <typename T>
T get_as(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

template <typename T>
void read_optional(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = get_as<T>(j, key);
    }
}

json range_json(const wave::Range& r) { return json::array({r.lo, r.hi}); }

wave::Range range_from(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError(std::string("range '") + key + "' must be a [lo, hi] pair");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

} // namespace

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

json to_json(const wave::GenConfig& c) {
    const auto& r = c.ranges;
    json ranges = {{"v_p", range_json(r.v_p)},
                   {"v_n", range_json(r.v_n)},
                   {"r_p", range_json(r.r_p)},
                   {"r_n", range_json(r.r_n)},
                   {"loading", range_json(r.loading)},
                   {"jitter", range_json(r.jitter)},
                   {"step_magnitude", range_json(r.step_magnitude)},
                   {"cap_magnitude", range_json(r.cap_magnitude)},
                   {"cap_time_constant", range_json(r.cap_time_constant)},
                   {"cap_frequency", range_json(r.cap_frequency)},
                   {"dropout_magnitude", range_json(r.dropout_magnitude)},
                   {"onset", range_json(r.onset)},
                   {"power_factor_angle", range_json(r.power_factor_angle)}};
    json mix = {{"load_step", c.transient_mix.load_step},
                {"capacitor_switch", c.transient_mix.capacitor_switch},
                {"feeder_switch", c.transient_mix.feeder_switch}};
    return {{"scenario", std::string(wave::to_string(c.scenario))},
            {"count", c.count},
            {"seed", c.seed},
            {"ranges", ranges},
            {"transient_mix", mix}};
}

wave::GenConfig gen_config_from_json(const json& j) {
    reject_unknown(j, {"scenario", "count", "seed", "ranges", "transient_mix"}, "generation config");
    if (!j.contains("scenario") || !j.contains("count")) {
        throw ConfigError("generation config needs 'scenario' and 'count'");
    }
    const auto scenario = wave::system_from_string(get_as<std::string>(j, "scenario"));
    // Ranges default to the built-in profile of the chosen system.
    wave::GenConfig c = wave::gen_profile(scenario == wave::SystemId::SourceSystem ? "case1" : "case2");
    c.scenario = scenario;
    c.count = get_as<std::size_t>(j, "count");
    c.seed = 0;
    read_optional(j, "seed", c.seed);

    if (j.contains("ranges")) {
        const auto& jr = j.at("ranges");
        reject_unknown(jr,
                       {"v_p", "v_n", "r_p", "r_n", "loading", "jitter", "step_magnitude", "cap_magnitude",
                        "cap_time_constant", "cap_frequency", "dropout_magnitude", "onset", "power_factor_angle"},
                       "ranges");
        auto& r = c.ranges;
        const std::pair<const char*, wave::Range*> fields[] = {
            {"v_p", &r.v_p},
            {"v_n", &r.v_n},
            {"r_p", &r.r_p},
            {"r_n", &r.r_n},
            {"loading", &r.loading},
            {"jitter", &r.jitter},
            {"step_magnitude", &r.step_magnitude},
            {"cap_magnitude", &r.cap_magnitude},
            {"cap_time_constant", &r.cap_time_constant},
            {"cap_frequency", &r.cap_frequency},
            {"dropout_magnitude", &r.dropout_magnitude},
            {"onset", &r.onset},
            {"power_factor_angle", &r.power_factor_angle}};
        for (const auto& [key, dst] : fields) {
            if (jr.contains(key)) {
                *dst = range_from(jr, key);
            }
        }
    }
    if (j.contains("transient_mix")) {
        const auto& jm = j.at("transient_mix");
        reject_unknown(jm, {"load_step", "capacitor_switch", "feeder_switch"}, "transient_mix");
        read_optional(jm, "load_step", c.transient_mix.load_step);
        read_optional(jm, "capacitor_switch", c.transient_mix.capacitor_switch);
        read_optional(jm, "feeder_switch", c.transient_mix.feeder_switch);
    }
    wave::validate(c);
    return c;
}

json to_json(const nn::ModelSpec& spec) {
    if (const auto* cnn = std::get_if<nn::CnnSpec>(&spec)) {
        json blocks = json::array();
        for (const auto& b : cnn->blocks) {
            blocks.push_back({{"out_channels", b.out_channels},
                              {"kernel_size", b.kernel_size},
                              {"pool_width", b.pool_width},
                              {"pool_stride", b.pool_stride}});
        }
        return {{"architecture", "cnn"},
                {"input_length", cnn->input_length},
                {"blocks", blocks},
                {"hidden_dim", cnn->hidden_dim},
                {"output_dim", cnn->output_dim}};
    }
    const auto& mlp = std::get<nn::MlpSpec>(spec);
    return {{"architecture", "mlp"}, {"dims", mlp.dims}};
}

nn::ModelSpec model_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("architecture")) {
        throw ConfigError("model spec needs an 'architecture' key");
    }
    const auto arch = get_as<std::string>(j, "architecture");
    nn::ModelSpec spec;
    if (arch == "cnn") {
        reject_unknown(j, {"architecture", "input_length", "blocks", "hidden_dim", "output_dim"}, "cnn spec");
        auto s = nn::CnnSpec::defaults();
        read_optional(j, "input_length", s.input_length);
        read_optional(j, "hidden_dim", s.hidden_dim);
        read_optional(j, "output_dim", s.output_dim);
        if (j.contains("blocks")) {
            const auto& jb = j.at("blocks");
            if (!jb.is_array() || jb.size() != s.blocks.size()) {
                throw ConfigError("cnn spec needs exactly 4 blocks");
            }
            for (std::size_t i = 0; i < s.blocks.size(); ++i) {
                reject_unknown(jb[i], {"out_channels", "kernel_size", "pool_width", "pool_stride"}, "cnn block");
                s.blocks[i].out_channels = get_as<std::size_t>(jb[i], "out_channels");
                s.blocks[i].kernel_size = get_as<std::size_t>(jb[i], "kernel_size");
                s.blocks[i].pool_width = get_as<std::size_t>(jb[i], "pool_width");
                s.blocks[i].pool_stride = get_as<std::size_t>(jb[i], "pool_stride");
            }
        }
        spec = s;
    } else if (arch == "mlp") {
        reject_unknown(j, {"architecture", "dims"}, "mlp spec");
        auto s = nn::MlpSpec::defaults();
        if (j.contains("dims")) {
            const auto& jd = j.at("dims");
            if (!jd.is_array() || jd.size() != s.dims.size()) {
                throw ConfigError("mlp spec needs exactly 5 dims (4 layers)");
            }
            for (std::size_t i = 0; i < s.dims.size(); ++i) {
                s.dims[i] = jd[i].get<std::size_t>();
            }
        }
        spec = s;
    } else {
        throw ConfigError("unknown architecture '" + arch + "' (expected cnn or mlp)");
    }
    nn::validate(spec);
    return spec;
}

nn::ModelSpec resolve_model_spec(std::string_view name_or_path) {
    if (name_or_path == "cnn") {
        return nn::CnnSpec::defaults();
    }
    if (name_or_path == "mlp") {
        return nn::MlpSpec::defaults();
    }
    return model_spec_from_json(load_json(std::filesystem::path(name_or_path)));
}

json to_json(const train::TrainConfig& c) {
    json j = {{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"seed", c.seed},
              {"validation_fraction", c.validation_fraction},
              {"freeze_conv", c.freeze_conv}};
    if (c.early_stop) {
        j["early_stop"] = {{"patience", c.early_stop->patience}, {"min_delta", c.early_stop->min_delta}};
    }
    return j;
}

train::TrainConfig train_config_from_json(const json& j, train::TrainConfig base) {
    reject_unknown(j,
                   {"epochs", "batch_size", "learning_rate", "momentum", "seed", "validation_fraction", "freeze_conv",
                    "early_stop"},
                   "training config");
    read_optional(j, "epochs", base.epochs);
    read_optional(j, "batch_size", base.batch_size);
    read_optional(j, "learning_rate", base.learning_rate);
    read_optional(j, "momentum", base.momentum);
    read_optional(j, "seed", base.seed);
    read_optional(j, "validation_fraction", base.validation_fraction);
    read_optional(j, "freeze_conv", base.freeze_conv);
    if (j.contains("early_stop")) {
        const auto& je = j.at("early_stop");
        if (je.is_null()) {
            base.early_stop.reset();
        } else {
            reject_unknown(je, {"patience", "min_delta"}, "early_stop");
            train::EarlyStop es;
            read_optional(je, "patience", es.patience);
            read_optional(je, "min_delta", es.min_delta);
            base.early_stop = es;
        }
    }
    train::validate(base);
    return base;
}

} // namespace hifnet::config
