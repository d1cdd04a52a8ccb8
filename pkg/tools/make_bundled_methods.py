#!/usr/bin/env python3
"""Regenerate the coefficient files shipped in src/ssprk/methods/.

Classic tableaux are written from exact expressions.  The diagonally
implicit high-linear-order methods are entered in their published canonical
convex-combination form (nonzero alpha entries and v); the scaling r is
recovered from the first-order consistency of the induced weights
(b' e = 1 requires r = alpha_last (I - alpha_stages)^{-1} e), which pins it
far more precisely than its rounded headline value, and beta = alpha / r is
then stored at full precision.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from ssprk.methodfile import save_method
from ssprk.tableau import ButcherTableau, ImexTableau, ShuOsherForm

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "ssprk" / "methods"


def recover_scaling(alpha):
    """The canonical scaling implied by alpha alone via b' e = 1."""
    s = alpha.shape[1]
    M = np.eye(s) - alpha[:s, :]
    return float(alpha[s, :] @ np.linalg.solve(M, np.ones(s)))


def canonical_form(s, entries, v_entries, claimed_r):
    alpha = np.zeros((s + 1, s))
    for (i, j), val in entries.items():
        alpha[i - 1, j - 1] = val
    v = np.zeros(s + 1)
    for i, val in v_entries.items():
        v[i - 1] = val
    resid = np.abs(v + alpha.sum(axis=1) - 1.0)
    assert np.max(resid) < 5e-15, f"row consistency defect {np.max(resid):.2e}"
    r = recover_scaling(alpha)
    assert abs(r - claimed_r) < 5e-3, f"recovered r={r} vs claimed {claimed_r}"
    beta = alpha / r
    return ShuOsherForm(alpha, beta, v, r=r)


def write(method, name):
    save_method(method, OUT / f"{name}.rk")
    print(f"wrote {name}.rk")


# --- classic single tableaux -----------------------------------------------

write(ButcherTableau([[0.0]], [1.0], "explicit", name="forward-euler",
                     p=1, p_lin=1, ssp_coefficient=1.0), "forward-euler")

write(ButcherTableau([[0.5]], [1.0], "sdirk", name="implicit-midpoint",
                     p=2, p_lin=2, ssp_coefficient=2.0), "implicit-midpoint")

write(ButcherTableau([[0, 0, 0], [1, 0, 0], [0.25, 0.25, 0]],
                     [1 / 6, 1 / 6, 2 / 3], "explicit", name="ssprk33",
                     p=3, p_lin=3, ssp_coefficient=1.0), "ssprk33")

write(ButcherTableau([[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0],
                      [0, 0, 1, 0]],
                     [1 / 6, 1 / 3, 1 / 3, 1 / 6], "explicit",
                     name="rk4-classic", p=4, p_lin=4), "rk4-classic")

A104 = np.zeros((10, 10))
for i in range(10):
    for j in range(i):
        A104[i, j] = 1 / 6
    if i >= 5:
        for j in range(5):
            A104[i, j] = 1 / 15
b104 = np.full(10, 1 / 10)
ketcheson104 = ButcherTableau(A104, b104, "explicit",
                              name="ketcheson-ssprk104", p=4, p_lin=4,
                              ssp_coefficient=6.0)
write(ketcheson104, "ketcheson-ssprk104")

# --- diagonally implicit methods with higher linear than nonlinear order ---
# Canonical-form nonzero entries, 1-based (row, column) indices.

DIRK_S6_P4_PLIN6 = {
    (1, 1): 0.227696764527492,
    (2, 1): 0.773299008278988, (2, 2): 0.226700991721012,
    (3, 2): 0.566850708114719, (3, 3): 0.245119620891410,
    (4, 3): 0.589123375926120, (4, 4): 0.245088907884392,
    (5, 2): 0.273146312340082, (5, 4): 0.468182990851259,
    (5, 5): 0.226105041192215,
    (6, 5): 0.772671881656312, (6, 6): 0.227328118343688,
    (7, 1): 0.005835455470528, (7, 2): 0.016317087005175,
    (7, 3): 0.140604847510042, (7, 4): 0.134029552181827,
    (7, 6): 0.703213057832428,
}
DIRK_S6_V = {
    1: 0.772303235472508, 3: 0.188029670993872, 4: 0.165787716189488,
    5: 0.032565655616444,
}
write(canonical_form(6, DIRK_S6_P4_PLIN6, DIRK_S6_V, 5.138),
      "dirk-s6-p4-plin6")

DIRK_S8_P4_PLIN9 = {
    (1, 1): 0.146943975728437,
    (2, 1): 0.854796464970015, (2, 2): 0.145203535029985,
    (3, 2): 0.612204675611763, (3, 3): 0.136155301978034,
    (4, 3): 0.742598809241823, (4, 4): 0.135251383179389,
    (5, 4): 0.796548121452431, (5, 5): 0.136561808924711,
    (6, 1): 0.260577803576825, (6, 5): 0.269626835933091,
    (6, 6): 0.206284522717965,
    (7, 2): 0.198036604411651, (7, 6): 0.596122990527354,
    (7, 7): 0.205840405060996,
    (8, 5): 0.510718712707677, (8, 7): 0.353463620808626,
    (8, 8): 0.135817666483696,
    (9, 1): 0.003486997034287, (9, 2): 0.067521279383993,
    (9, 4): 0.256478057637965, (9, 8): 0.662855611847356,
}
DIRK_S8_V = {
    1: 0.853056024271563, 3: 0.251640022410203, 4: 0.122149807578787,
    5: 0.066890069622858, 6: 0.263510837772119, 9: 0.009658054096400,
}
write(canonical_form(8, DIRK_S8_P4_PLIN9, DIRK_S8_V, 4.735),
      "dirk-s8-p4-plin9")

DIRK_S10_P2_PLIN11 = {
    (1, 1): 0.193277114534410,
    (2, 1): 0.806723199562524, (2, 2): 0.193276800437476,
    (3, 2): 0.080009844643863, (3, 3): 0.129448616881864,
    (4, 3): 0.870552299752962, (4, 4): 0.129447700247038,
    (5, 4): 0.241978799620415, (5, 5): 0.117235708890556,
    (6, 5): 0.718962893859175, (6, 6): 0.117234259419046,
    (7, 6): 0.546025511754727, (7, 7): 0.117237564101546,
    (8, 7): 0.760604303914880, (8, 8): 0.117233906332291,
    (9, 8): 0.822633852616330, (9, 9): 0.117235191356250,
    (10, 9): 0.880317745035338, (10, 10): 0.117236158521012,
    (11, 1): 0.028409070825259, (11, 2): 0.043364313791996,
    (11, 3): 0.001158601801210, (11, 10): 0.921532831100178,
}
DIRK_S10_V = {
    1: 0.806722885465590, 3: 0.790541538474273, 5: 0.640785491489029,
    6: 0.163802846721778, 7: 0.336736924143727, 8: 0.122161789752829,
    9: 0.060130956027420, 10: 0.002446096443650, 11: 0.005535182481357,
}
write(canonical_form(10, DIRK_S10_P2_PLIN11, DIRK_S10_V, 5.2306),
      "dirk-s10-p2-plin11")

# --- additive implicit-explicit pairs ---------------------------------------

def lower(s, entries, diag=None, diag_range=()):
    M = np.zeros((s, s))
    for (i, j), val in entries.items():
        M[i - 1, j - 1] = val
    if diag is not None:
        for i in diag_range:
            M[i - 1, i - 1] = diag
    return M

# Partner for the ten-stage fourth-order explicit method: a singly
# diagonally implicit tableau sharing its weights and abscissas.
AT_K104 = lower(10, {
    (2, 1): -0.763062399901101,
    (3, 1): -1.929471352156769, (3, 2): 1.333075618922335,
    (4, 1): -1.746903568350466, (4, 2): 0.408445589167274,
    (4, 3): 0.908728912615425,
    (5, 1): 0.565228647234277, (5, 2): 1.133923847131481,
    (5, 3): -1.557731112458759, (5, 4): -0.404483781808100,
    (6, 1): 1.982844041162849, (6, 2): -1.490145231639306,
    (6, 3): -0.008867539995790, (6, 4): -1.160584799688216,
    (6, 5): 0.080357796926028,
    (7, 1): 0.221597237328096, (7, 2): 1.616180514391033,
    (7, 3): 0.142461646204330, (7, 4): -0.868274370597692,
    (7, 5): -1.991484177541085, (7, 6): 0.449790083647550,
    (8, 1): -1.546919287943971, (8, 2): 1.854908818861482,
    (8, 3): 1.205736394483380, (8, 4): -0.314106013195022,
    (8, 5): 0.915344917019776, (8, 6): -1.386044641065531,
    (8, 7): -0.991982588061215,
    (9, 1): -0.091706218761790, (9, 2): 1.633885494435077,
    (9, 3): 0.932276645625014, (9, 4): -1.944938658929756,
    (9, 5): -1.977191163021469, (9, 6): 1.963551314474635,
    (9, 7): -1.871583791474667, (9, 8): 1.259310644418523,
    (10, 1): -1.527363916489275, (10, 2): 1.982728522581499,
    (10, 3): 1.859310770893058, (10, 4): -1.881872618524453,
    (10, 5): 1.047237251794738, (10, 6): -1.831562507581245,
    (10, 7): 1.992738025048269, (10, 8): -1.135512580190266,
    (10, 9): -0.435432014100091,
}, diag=0.929729066567767, diag_range=range(2, 11))
write(ImexTableau(A104, b104, AT_K104, b104.copy(),
                  name="imex-ssprk104-sdirk", pe=4, pi=3, p_lin=4,
                  k_designed=float("inf")), "imex-ssprk104-sdirk")

# Pair tuned for an implicit forward-Euler radius one tenth the explicit one.
A_K10_S5 = lower(5, {
    (2, 1): 0.740010097277110,
    (3, 1): 0.058133047039451, (3, 2): 0.516728366555161,
    (4, 1): 0.327995830636910, (4, 2): 0.028076226778328,
    (4, 3): 0.357399140460949,
    (5, 1): 0.255837111227683, (5, 2): 0.074862387600713,
    (5, 3): 0.116959465282915, (5, 4): 0.195688888775226,
})
AT_K10_S5 = lower(5, {
    (2, 1): 0.583773436668528, (2, 2): 0.156236660608582,
    (3, 1): 0.276599046373025, (3, 2): 0.012273492120642,
    (3, 3): 0.285988875100944,
    (4, 1): 0.348206780427965, (4, 2): 0.349725300350930,
    (4, 3): 0.015539117097292,
    (5, 1): 0.226390976173007, (5, 2): 0.140957344725959,
    (5, 3): 0.080310643212345, (5, 4): 0.195688888775226,
})
B_K10_S5 = np.array([0.243859806139543, 0.180742612023724,
                     0.161824368384123, 0.101972004412874,
                     0.311601209039737])
write(ImexTableau(A_K10_S5, B_K10_S5, AT_K10_S5, B_K10_S5.copy(),
                  name="imex-k10-s5-p3-plin5", pe=3, pi=3, p_lin=5,
                  k_designed=0.1), "imex-k10-s5-p3-plin5")

A_K10_S7 = lower(7, {
    (2, 1): 0.376055593238192,
    (3, 1): 0.127359848364171, (3, 2): 0.318823868640133,
    (4, 1): 0.184561142322538, (4, 2): 0.021362084173389,
    (4, 3): 0.297673384659880,
    (5, 1): 0.132655730337691, (5, 2): 0.006786263788702,
    (5, 3): 0.094405536658542, (5, 4): 0.228410568816280,
    (6, 1): 0.114983915662321, (6, 2): 0.136226885295266,
    (6, 3): 0.045369437546957, (6, 4): 0.109769611285921,
    (6, 5): 0.326960155246028,
    (7, 1): 0.122086625034326, (7, 2): 0.097697571022518,
    (7, 3): 0.158995977454046, (7, 4): 0.117285498485044,
    (7, 5): 0.211659248630559, (7, 6): 0.261454998381366,
})
AT_K10_S7 = lower(7, {
    (2, 1): 0.376055593238191,
    (3, 1): 0.158832832190656, (3, 2): 0.118579912937683,
    (3, 3): 0.168770971875965,
    (4, 1): 0.172252519817939, (4, 2): 0.198870773989805,
    (4, 3): 0.011308123857846, (4, 4): 0.121165193490219,
    (5, 1): 0.107284797278235, (5, 2): 0.125275675715479,
    (5, 3): 0.003608216309487, (5, 4): 0.156483792310469,
    (5, 5): 0.069605617987546,
    (6, 1): 0.111537098901469, (6, 2): 0.104025846350128,
    (6, 3): 0.228281462765514, (6, 4): 0.075203021889408,
    (6, 5): 0.214262575129975,
    (7, 1): 0.115503702215039, (7, 2): 0.116459412732323,
    (7, 3): 0.152707824629209, (7, 4): 0.080352146755342,
    (7, 5): 0.242701834294582, (7, 6): 0.261454998381366,
})
B_K10_S7 = np.array([0.148802853943694, 0.140365832446254,
                     0.185913207665706, 0.143576841907452,
                     0.102077358038296, 0.109741290668591,
                     0.169522615330006])
write(ImexTableau(A_K10_S7, B_K10_S7, AT_K10_S7, B_K10_S7.copy(),
                  name="imex-k10-s7-p4-plin6", pe=4, pi=4, p_lin=6,
                  k_designed=0.1), "imex-k10-s7-p4-plin6")

A_K100_S5 = lower(5, {
    (2, 1): 0.607406844316321,
    (3, 1): 0.330966515197897, (3, 2): 0.340310969038496,
    (4, 1): 0.194835632796261, (4, 2): 0.050335014780643,
    (4, 3): 0.464427204928710,
    (5, 1): 0.135852828893193, (5, 2): 0.192467857403262,
    (5, 3): 0.024895163948772, (5, 4): 0.337487088561988,
})
AT_K100_S5 = lower(5, {
    (2, 1): 0.607406844316321,
    (3, 1): 0.330966515197897, (3, 2): 0.340310969038496,
    (4, 1): 0.193496010547777, (4, 2): 0.200519538677067,
    (4, 3): 0.088728444949044, (4, 4): 0.226853858331728,
    (5, 1): 0.129157547811257, (5, 2): 0.131916477717161,
    (5, 3): 0.231093457658500, (5, 4): 0.037795421975484,
    (5, 5): 0.160740033644814,
})
B_K100_S5 = np.array([0.247413560693329, 0.225966553626905,
                      0.158714688358981, 0.110694923985245,
                      0.257210273335540])
write(ImexTableau(A_K100_S5, B_K100_S5, AT_K100_S5, B_K100_S5.copy(),
                  name="imex-k100-s5-p3-plin5", pe=3, pi=3, p_lin=5,
                  k_designed=0.01), "imex-k100-s5-p3-plin5")

A_K100_S10 = lower(10, {
    (2, 1): 0.296441642233457,
    (3, 1): 0.296441642233457, (3, 2): 0.296441642233457,
    (4, 1): 0.159129854065221, (4, 2): 0.159129854065221,
    (4, 3): 0.159129854065221,
    (5, 1): 0.019921058480607, (5, 2): 0.019307972560535,
    (5, 3): 0.019307972560535, (5, 4): 0.035968656715399,
    (6, 1): 0.083713252215858, (6, 2): 0.024819940994344,
    (6, 3): 0.014853700442704, (6, 4): 0.027670831336742,
    (6, 5): 0.228053739908418,
    (7, 1): 0.055091634074979, (7, 2): 0.016337375252376,
    (7, 3): 0.009777262948455, (7, 4): 0.018208562860852,
    (7, 5): 0.150068886917073, (7, 6): 0.195070983285382,
    (8, 1): 0.049748358305482, (8, 2): 0.025038891947022,
    (8, 3): 0.020856206502734, (8, 4): 0.017683704471081,
    (8, 5): 0.095682957831884, (8, 6): 0.124376005255730,
    (8, 7): 0.189009285909559,
    (9, 1): 0.073381984734260, (9, 2): 0.048836937556200,
    (9, 3): 0.030836020427511, (9, 4): 0.039354142711587,
    (9, 5): 0.082928693754279, (9, 6): 0.106285066647655,
    (9, 7): 0.161517203488072, (9, 8): 0.253323136059411,
    (10, 1): 0.065586205155812, (10, 2): 0.044449329946329,
    (10, 3): 0.028936784917608, (10, 4): 0.033888353855577,
    (10, 5): 0.071414307430042, (10, 6): 0.091527804079801,
    (10, 7): 0.139082279606173, (10, 8): 0.218136263377849,
    (10, 9): 0.255265559839090,
})
AT_K100_S10 = lower(10, {
    (2, 1): -0.047916334864055,
    (3, 1): -0.082116017384178, (3, 2): 0.330641324753580,
    (4, 1): 0.948951469602658, (4, 2): -0.238288155973038,
    (4, 3): -0.577631728531468,
    (5, 1): 0.441387001271949, (5, 2): -0.163364374457318,
    (5, 3): -0.504386376049355, (5, 4): -0.023488567545713,
    (6, 1): 0.099545320449493, (6, 2): 1.759501344125055,
    (6, 3): -0.824006411866389, (6, 4): 1.409963103927893,
    (6, 5): -2.410249868835498,
    (7, 1): 0.151486935292728, (7, 2): 0.407347161353228,
    (7, 3): -0.244112999903862, (7, 4): 0.557935535998744,
    (7, 5): -0.774009241132186, (7, 6): 0.001549336632953,
    (8, 1): 1.113607828755682, (8, 2): -1.940412832219541,
    (8, 3): 1.777801724820027, (8, 4): -0.950842851699990,
    (8, 5): 1.780109034747002, (8, 6): 0.158989846049901,
    (8, 7): -1.761215317327101,
    (9, 1): -1.089122782612700, (9, 2): 0.803069401235045,
    (9, 3): -0.090413146702761, (9, 4): -0.697564076196375,
    (9, 5): 0.822000558154658, (9, 6): -0.611804180680986,
    (9, 7): 1.687933136273893, (9, 8): -0.371993701189312,
    (10, 1): 0.444596175510804, (10, 2): -0.716394629436675,
    (10, 3): 0.093268024454960, (10, 4): 0.501655569949843,
    (10, 5): 0.351539276646713, (10, 6): 0.952014224936281,
    (10, 7): -0.598231110418698, (10, 8): 0.115776872278219,
    (10, 9): -0.540295492810681,
}, diag=0.344357977097512, diag_range=range(2, 11))
B_K100_S10 = np.array([
    0.084877037374285, 0.060614911672550, 0.050348209787848,
    0.029884478272179, 0.088565247859017, 0.114451890708771,
    0.173923410482789, 0.112585396241353, 0.131748723280703,
    0.153000694320504])
write(ImexTableau(A_K100_S10, B_K100_S10, AT_K100_S10, B_K100_S10.copy(),
                  name="imex-s10-p4-plin6", pe=4, pi=3, p_lin=6,
                  k_designed=float("inf")), "imex-s10-p4-plin6")

print("done")
