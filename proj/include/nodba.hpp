#pragma once

#include "nodba/catalog.hpp"
#include "nodba/cem.hpp"
#include "nodba/cost_model.hpp"
#include "nodba/dbms.hpp"
#include "nodba/environment.hpp"
#include "nodba/errors.hpp"
#include "nodba/oracle.hpp"
#include "nodba/policy.hpp"
#include "nodba/rng.hpp"
#include "nodba/util.hpp"
#include "nodba/workload.hpp"
