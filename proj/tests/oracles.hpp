#pragma once

// Reference values computed independently (30-digit mpmath quadrature and
// closed forms) and frozen here.

#include <array>
#include <utility>

namespace oracle {

// Separation probability of the basic walk at half marginals,
// (2/pi) int_0^{pi/2} (1 - I_{sin^2 phi}(a/2, b/2)) dphi with a = theta/pi.
inline constexpr std::array<std::pair<double, double>, 10> kSeparation = {{
    {0.3, 0.10664629001326775},
    {0.6, 0.20576359885476497},
    {0.9, 0.29969345765834714},
    {1.2, 0.3902930976441012},
    {1.5, 0.47913431961043335},
    {1.8, 0.56764619923524433},
    {2.1, 0.65723169223185416},
    {2.4, 0.74937961241025039},
    {2.7, 0.84579199458446042},
    {3.0, 0.9485517860454249},
}};
inline constexpr double kSeparationTwoThirdsPi = 0.65553935269811809;

// (1 - P((1 - eps) pi)) / ((4 / pi) eps)
inline constexpr double kAsymptoticRatio01 = 0.911473555;
inline constexpr double kAsymptoticRatio005 = 0.9137061551;

inline constexpr double kQuarterBetaQuarter = 1.8540746773013719;  // B(1/4, 1/4) / 4
inline constexpr double kRphi1At03 = 1.734005080974217;            // B_{sin^2 1}(0.15, 0.35) / 4
inline constexpr double kHyp3f2Reducible = 1.0738107737225598;     // 3F2(.3,.4,1.2; 1.2,2.5; 1)
inline constexpr double kHyp3f2Generic = 1.086091800310624;        // 3F2(.25,.5,.75; 1.25,1.5; 1)
inline constexpr double kHyp2f1 = 1.0894648007858961;              // 2F1(.3,.7; 1.9; .6)
inline constexpr double kIncBetaReg = 0.088943723170665592;        // I_.3(2.5, 1.5)

// 5 (1 - cos(4 pi / 5)) / 2
inline constexpr double kC5Sdp = 4.5225424859373686;

}  // namespace oracle
