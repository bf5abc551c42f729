// Copyright 2026 The repstab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "repstab/circuit.h"

#include <cctype>
#include <sstream>

#include "repstab/errors.h"

namespace repstab {

std::string_view component_name(Component c) {
    switch (c) {
        case Component::DD:
            return "DD";
        case Component::CZ:
            return "CZ";
        case Component::M:
            return "M";
        case Component::R:
            return "R";
        case Component::H:
            return "H";
        case Component::I:
            return "I";
    }
    return "?";
}

Component parse_component(std::string_view name) {
    std::string upper(name);
    for (char &ch : upper) {
        ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    for (Component c : kAllComponents) {
        if (component_name(c) == upper) {
            return c;
        }
    }
    throw ValidationError("unknown noise component '" + std::string(name) + "'");
}

std::optional<Component> component_of(NoiseClass c) {
    switch (c) {
        case NoiseClass::None:
            return std::nullopt;
        case NoiseClass::DD:
            return Component::DD;
        case NoiseClass::CZ:
            return Component::CZ;
        case NoiseClass::M:
            return Component::M;
        case NoiseClass::R:
            return Component::R;
        case NoiseClass::H:
            return Component::H;
        case NoiseClass::I:
            return Component::I;
    }
    return std::nullopt;
}

size_t Circuit::op_count() const {
    size_t n = 0;
    for (const auto &m : moments) {
        n += m.ops.size();
    }
    return n;
}

namespace {

[[noreturn]] void fail_at(size_t moment, const std::string &what) {
    std::ostringstream ss;
    ss << "malformed circuit at moment " << moment << ": " << what;
    throw ValidationError(ss.str());
}

}  // namespace

void Circuit::validate() const {
    if (qubit_count == 0) {
        throw ValidationError("malformed circuit: qubit_count is 0");
    }
    // 0 = fresh/reset, 1 = measured and awaiting reset.
    std::vector<uint8_t> measured(qubit_count, 0);
    std::vector<size_t> last_seen(qubit_count, SIZE_MAX);
    size_t m_index = 0;
    for (size_t k = 0; k < moments.size(); ++k) {
        auto touch = [&](uint32_t q) {
            if (q >= qubit_count) {
                fail_at(k, "qubit " + std::to_string(q) + " out of range");
            }
            if (last_seen[q] == k) {
                fail_at(k, "qubit " + std::to_string(q) + " used twice");
            }
            last_seen[q] = k;
        };
        for (const Op &op : moments[k].ops) {
            touch(op.q0);
            if (op.kind == OpKind::CZ) {
                if (op.q0 == op.q1) {
                    fail_at(k, "CZ with identical operands " + std::to_string(op.q0));
                }
                touch(op.q1);
            }
            auto require_live = [&](uint32_t q) {
                if (measured[q]) {
                    fail_at(k, "qubit " + std::to_string(q) + " reused after measurement without reset");
                }
            };
            switch (op.kind) {
                case OpKind::R:
                    measured[op.q0] = 0;
                    break;
                case OpKind::M:
                    require_live(op.q0);
                    if (m_index >= measurement_schedule.size()) {
                        fail_at(k, "more M ops than measurement schedule entries");
                    }
                    if (measurement_schedule[m_index].qubit != op.q0) {
                        fail_at(k, "measurement schedule entry " + std::to_string(m_index) +
                                       " names a different qubit");
                    }
                    ++m_index;
                    measured[op.q0] = 1;
                    break;
                case OpKind::CZ:
                    require_live(op.q0);
                    require_live(op.q1);
                    break;
                case OpKind::Idle:
                    if (op.noise != NoiseClass::I && op.noise != NoiseClass::DD) {
                        fail_at(k, "idle op must carry noise class I or DD");
                    }
                    break;
                default:
                    require_live(op.q0);
                    break;
            }
        }
    }
    if (m_index != measurement_schedule.size()) {
        throw ValidationError("malformed circuit: measurement schedule has " +
                              std::to_string(measurement_schedule.size()) + " entries but circuit has " +
                              std::to_string(m_index) + " M ops");
    }
}

}  // namespace repstab
