#pragma once

#include "vthing/clock.hpp"
#include "vthing/config.hpp"
#include "vthing/containers.hpp"
#include "vthing/error.hpp"
#include "vthing/http_binding.hpp"
#include "vthing/json.hpp"
#include "vthing/probe.hpp"
#include "vthing/random_source.hpp"
#include "vthing/runtime.hpp"
#include "vthing/schema_gen.hpp"
#include "vthing/schema_validate.hpp"
#include "vthing/td_model.hpp"
#include "vthing/td_parser.hpp"
