#pragma once

#include "error.hpp"
#include "core.hpp"
#include "rules.hpp"
#include "axioms.hpp"
#include "models.hpp"
#include "templates.hpp"
#include "lab.hpp"
