#pragma once

#include "fbsec/channel_model.hpp"
#include "fbsec/closed_form_case2.hpp"
#include "fbsec/errors.hpp"
#include "fbsec/montecarlo.hpp"
#include "fbsec/numeric_general.hpp"
#include "fbsec/secrecy_config.hpp"
#include "fbsec/special_functions.hpp"
