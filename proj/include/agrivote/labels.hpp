#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/util.hpp"

namespace agrivote {

// ---------------------------------------------------------------------------
// Class vocabulary: stable ids, names, and the crop grouping used by the
// crop-level accuracy roll-ups.
// ---------------------------------------------------------------------------

enum class Crop { Pepper, Potato, Tomato, Other };

inline const char* crop_name(Crop crop) {
    switch (crop) {
        case Crop::Pepper: return "Pepper";
        case Crop::Potato: return "Potato";
        case Crop::Tomato: return "Tomato";
        case Crop::Other:  return "Other";
    }
    return "Other";
}

inline Crop crop_from_string(std::string_view text) {
    if (text == "Pepper") return Crop::Pepper;
    if (text == "Potato") return Crop::Potato;
    if (text == "Tomato") return Crop::Tomato;
    if (text == "Other") return Crop::Other;
    raise(ErrorCode::ParseError, "unknown crop '" + std::string(text) + "'");
}

/// Crop is derived from the class-name prefix. Names outside the three known
/// prefixes bucket into Other so the toolkit is not tied to one dataset.
inline Crop crop_from_class_name(std::string_view name) {
    if (name.starts_with("Pepper")) return Crop::Pepper;
    if (name.starts_with("Potato")) return Crop::Potato;
    if (name.starts_with("Tomato")) return Crop::Tomato;
    return Crop::Other;
}

struct ClassLabel {
    int id = 0;
    std::string name;
    Crop crop = Crop::Other;

    bool operator==(const ClassLabel&) const = default;
};

struct LabelRegistry {
    std::vector<ClassLabel> classes;               // ordered by id
    std::map<Crop, std::vector<int>> crop_index;   // crop -> class ids

    int num_classes() const { return static_cast<int>(classes.size()); }

    bool operator==(const LabelRegistry&) const = default;
};

/// Ids are assigned by lexicographic (byte-wise) sort of the class names so
/// the registry is independent of filesystem enumeration order.
inline LabelRegistry build_registry(std::vector<std::string> class_names) {
    if (class_names.empty()) raise(ErrorCode::EmptyRegistry, "no class names given");
    std::sort(class_names.begin(), class_names.end());
    for (std::size_t i = 1; i < class_names.size(); ++i)
        if (class_names[i] == class_names[i - 1])
            raise(ErrorCode::DuplicateClass, "duplicate class name '" + class_names[i] + "'");
    if (class_names.size() < 2)
        raise(ErrorCode::EmptyRegistry, "at least 2 classes required, got 1");

    LabelRegistry registry;
    registry.classes.reserve(class_names.size());
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        const std::string& name = class_names[i];
        if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos)
            raise(ErrorCode::InvalidArgument, "class name '" + name + "' contains ',' or newline");
        ClassLabel label{static_cast<int>(i), name, crop_from_class_name(name)};
        registry.crop_index[label.crop].push_back(label.id);
        registry.classes.push_back(std::move(label));
    }
    return registry;
}

inline Crop crop_of(const LabelRegistry& registry, int class_id) {
    if (class_id < 0 || class_id >= registry.num_classes())
        raise(ErrorCode::UnknownClass,
              "class id " + std::to_string(class_id) + " out of range [0, " +
                  std::to_string(registry.num_classes()) + ")");
    return registry.classes[static_cast<std::size_t>(class_id)].crop;
}

inline int class_id_of(const LabelRegistry& registry, std::string_view name) {
    for (const ClassLabel& label : registry.classes)
        if (label.name == name) return label.id;
    raise(ErrorCode::UnknownClass, "class name '" + std::string(name) + "' not in registry");
}

inline std::vector<std::string> class_names(const LabelRegistry& registry) {
    std::vector<std::string> names;
    names.reserve(registry.classes.size());
    for (const ClassLabel& label : registry.classes) names.push_back(label.name);
    return names;
}

// ---------------------------------------------------------------------------
// Serialization. One line per class, `<id>,<name>,<crop>`, '\n' terminated,
// in id order. This byte layout is what the content hash covers, so other
// artifacts can pin the exact label set they were produced against.
// ---------------------------------------------------------------------------

inline std::string serialize_registry(const LabelRegistry& registry) {
    std::string out;
    for (const ClassLabel& label : registry.classes) {
        out += std::to_string(label.id);
        out += ',';
        out += label.name;
        out += ',';
        out += crop_name(label.crop);
        out += '\n';
    }
    return out;
}

inline std::string registry_hash(const LabelRegistry& registry) {
    return content_hash(serialize_registry(registry));
}

inline LabelRegistry parse_registry(std::string_view text) {
    LabelRegistry registry;
    const std::vector<std::string> lines = split_lines(text);
    if (lines.empty()) raise(ErrorCode::EmptyRegistry, "registry file is empty");
    for (const std::string& line : lines) {
        const std::vector<std::string> fields = split_string(line, ',');
        if (fields.size() != 3)
            raise(ErrorCode::ParseError, "registry line '" + line + "' is not <id>,<name>,<crop>");
        ClassLabel label;
        label.id = static_cast<int>(parse_int(fields[0], "registry id"));
        label.name = fields[1];
        label.crop = crop_from_string(fields[2]);
        if (label.id != static_cast<int>(registry.classes.size()))
            raise(ErrorCode::ParseError, "registry ids not contiguous at line '" + line + "'");
        if (label.crop != crop_from_class_name(label.name))
            raise(ErrorCode::ParseError, "crop does not match name prefix in line '" + line + "'");
        registry.crop_index[label.crop].push_back(label.id);
        registry.classes.push_back(std::move(label));
    }
    for (std::size_t i = 1; i < registry.classes.size(); ++i)
        if (registry.classes[i].name <= registry.classes[i - 1].name)
            raise(ErrorCode::ParseError, "registry names not in sorted order");
    return registry;
}

inline void save_registry(const LabelRegistry& registry, const std::filesystem::path& path) {
    write_file(path, serialize_registry(registry));
}

inline LabelRegistry load_registry(const std::filesystem::path& path) {
    return parse_registry(read_file(path));
}

}  // namespace agrivote
