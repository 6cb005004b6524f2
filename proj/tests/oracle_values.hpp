#pragma once

// Frozen output of tests/oracles/mnl_oracle.py on data/modechoice_synth.csv.

#include <array>

namespace oracle {

inline constexpr double null_loglik = -1078.1232389677798;

namespace best {
inline constexpr double loglik = -744.00319818603;
inline constexpr std::array<double, 7> theta{-0.7468832013298617, -0.32865449646938283, 0.5016664773707469, -0.010173172666550568, -0.046682115468565995, -0.02161188354085605, -0.003310352203212559};
inline constexpr std::array<double, 7> t{-3.7205162776310545, -1.167747050937012, 2.6684670878998373, -11.336963493119857, -11.809800796905764, -3.9878600794897663, -3.0661651528211245};
}  // namespace best

namespace best_cost_x100 {
inline constexpr double loglik = -744.00319818603;
inline constexpr std::array<double, 7> theta{-0.7468831486648395, -0.32865440069938767, 0.5016665685974256, -0.010173172768084483, -0.0004668211528430532, -0.021611887004691535, -0.0033103519149040314};
}  // namespace best_cost_x100

namespace time_cost {
inline constexpr double loglik = -757.0704417758792;
inline constexpr std::array<double, 5> theta{-1.2362250174424085, -1.1393179130187998, -0.09588993457864428, -0.011115185063545002, -0.04678125641699646};
inline constexpr std::array<double, 5> t{-7.700228722456657, -5.795823168925654, -0.8397333543021803, -13.10028233140833, -11.965232767017001};
}  // namespace time_cost

namespace no_asc {
inline constexpr double loglik = -851.6516279778425;
inline constexpr std::array<double, 2> theta{-0.010868152179709708, -0.042875856419310784};
inline constexpr std::array<double, 2> t{-17.315326118117284, -14.755848594534939};
}  // namespace no_asc

namespace rail_cost_only {
inline constexpr double loglik = -759.1030920229576;
inline constexpr std::array<double, 6> theta{-1.2145318169574175, -1.1955735084557988, -6.0313408894066285, -0.011472979180359888, -0.046689195969059925, 0.035757147041171826};
inline constexpr std::array<double, 6> t{-7.435440764292583, -5.714011508128336, -7.179166746768589, -12.267369640160805, -11.793641290630257, 2.2153909985264573};
}  // namespace rail_cost_only

namespace log_cost {
inline constexpr double loglik = -772.5172940973991;
inline constexpr std::array<double, 5> theta{-1.5168823694677427, -1.4061336276828322, 0.012789877854549669, -0.010953035129296008, -1.8985915730516432};
inline constexpr std::array<double, 5> t{-8.247613328210749, -7.334768128423861, 0.11289184952631823, -12.963618759919006, -11.328894399306838};
}  // namespace log_cost

namespace boxcox_time {
inline constexpr double loglik = -756.921307958655;
inline constexpr std::array<double, 6> theta{-1.2442032508809522, -1.2260437316385415, -0.10232110085024479, -0.021523752660589583, -0.04702319958014366, 0.8800243268867189};
inline constexpr std::array<double, 6> t{-7.714296528047436, -4.818841386096395, -0.8908103674397666, -0.8487723952349382, -11.938737702574093, 4.109938039050445};
}  // namespace boxcox_time

namespace piecewise_time {
inline constexpr double loglik = -755.965220031451;
inline constexpr std::array<double, 7> theta{-1.2344148470213427, -0.9887313555408643, -0.10517431211692761, -0.0047174646198149565, -0.012789430852414196, -0.010125112765991363, -0.047061801009795776};
inline constexpr std::array<double, 7> t{-7.633126099410171, -3.2315288749672253, -0.9158323554246169, -0.7335182096361723, -8.11207341302442, -8.056378519290291, -11.88684061277437};
}  // namespace piecewise_time

namespace business_air_rail {
inline constexpr double loglik = -1020.0489373434192;
inline constexpr std::array<double, 2> theta{0.24780023710213878, 1.3054401189441907};
inline constexpr std::array<double, 2> t{1.3738950016484595, 9.96737804953202};
}  // namespace business_air_rail

namespace no_asc_log {
inline constexpr double loglik = -928.8440378042494;
inline constexpr std::array<double, 2> theta{-0.00867836458413428, -1.2522279392554299};
inline constexpr std::array<double, 2> t{-14.857497346102178, -11.15088067058675};
}  // namespace no_asc_log

namespace no_asc_access {
inline constexpr double loglik = -818.0212055348917;
inline constexpr std::array<double, 3> theta{-0.012806491158371042, -0.04310933992627705, -0.02435018278022568};
inline constexpr std::array<double, 3> t{-18.065870157815628, -14.573465689861706, -8.00249791432293};
}  // namespace no_asc_access

namespace rail_cost_noasc {
inline constexpr double loglik = -826.7376408864826;
inline constexpr std::array<double, 3> theta{-0.008497940632454334, -0.03497239910908679, -0.049596714249795795};
inline constexpr std::array<double, 3> t{-13.312471324441555, -11.959325745441399, -9.414967932667249};
}  // namespace rail_cost_noasc

}  // namespace oracle
