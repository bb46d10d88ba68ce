# Independent scalar oracle for frozen test constants.
# Run: python3 tools/oracle_values.py
import math

def logcosh(z):
    az = abs(z)
    return az - math.log(2.0) + math.log1p(math.exp(-2.0*az))

# --- integrator oracles ---
# one euler step of xdot=-x, x=1, h=0.1
print("euler_step:", 1.0 - 0.1*1.0)
# one rk4 step of xdot=-x, x=1, h=0.1 (stability function of -h)
h = 0.1
rk4 = 1 - h + h**2/2 - h**3/6 + h**4/24
print("rk4_step:", repr(rk4), "exact exp(-0.1):", repr(math.exp(-0.1)))

# --- plant ---
th1, th2, vt = 0.4, 1.0, 100.0
print("friction(0.5):", repr(th1*0.5 + th2*math.tanh(vt*0.5)))

# --- I&I outputs at s=(0,0,0,k1=1), x1=0.1, vt=100 ---
k1 = 1.0
x2hat = 0.0 + k1*0.1
th1hat = 0.0 - (vt/(2*k1))*x2hat**2
th2hat = 0.0 - (1/k1)*logcosh(vt*x2hat)
print("ii x2hat:", repr(x2hat), "th1hat:", repr(th1hat), "th2hat:", repr(th2hat))
print("logcosh(10) vs naive:", repr(logcosh(10.0)), repr(math.log(math.cosh(10.0))))

# ii_deriv chain at same point, u=0
u = 0.0
x2I_dot = -(th1hat + k1)*x2hat - th2hat*math.tanh(vt*x2hat) + u
th1I_dot = (vt/k1)*x2hat*(x2I_dot + k1*x2hat)
th2I_dot = (vt/k1)*math.tanh(vt*x2hat)*(x2I_dot + k1*x2hat)
print("ii_deriv:", repr(x2I_dot), repr(th1I_dot), repr(th2I_dot))

# ii_outputs at s=(0.2,0,0,1), x1=0
x2hat_b = 0.2 + 1.0*0.0
print("ii b x2hat:", repr(x2hat_b), "th1hat:", repr(0.0 - (vt/2)*x2hat_b**2))

# --- SM pieces ---
print("sm inj c2=25, x1tilde=0.1:", repr(25.0*math.sqrt(0.1)))
print("sm regressor (0.1,0.5):", repr(-0.1), repr(-math.tanh(vt*0.5)))

# --- controller ---
a1, a2 = 0.49, 1.4
# ideal at s=(0.1,0.5), ref=(1,0,0)
ustar = th1*0.5 + th2*math.tanh(vt*0.5) + 0.0 - a1*(0.1-1.0) - a2*(0.5-0.0)
print("ideal:", repr(ustar))
# ce at x2hat=0.1, th_hat=(-0.5, -logcosh(10)), x1=0.1, ref=(1,0,0)
th_hat = (-0.5, -logcosh(10.0))
u_ce = th_hat[0]*0.1 + th_hat[1]*math.tanh(vt*0.1) + 0.0 - a1*(0.1-1.0) - a2*(0.1-0.0)
print("ce:", repr(u_ce))

# --- reference ramp midpoint ---
r100 = 1.5 + (0.5-1.5)*(100.0-90.0)/20.0
print("r(100):", repr(r100), "slope:", repr((0.5-1.5)/20.0))

# --- lyapunov rate ---
rate = vt**2*(1.0 + th1 + th2*vt)
print("lyap rate k1=1:", repr(rate), "== 1.014e6:", rate == 1.014e6)
print("lyap rate k1->0:", repr(vt**2*(th1+th2*vt)))

# --- ideal closed-loop closed form, double pole -0.7 ---
# e1(t) = (A + B t) exp(-0.7 t), A=e1(0)=-0.9, B=e2(0)+0.7*A=0.5-0.63
A = 0.1 - 1.0
B = 0.5 + 0.7*A
print("closed form A,B:", A, B, " e1(10):", repr((A+B*10)*math.exp(-7.0)))

# --- step count sanity ---
q = 150.0/1e-4
print("150/1e-4:", repr(q), "floor:", math.floor(q))
q2 = 0.3/1e-4
print("0.3/1e-4:", repr(q2), "floor:", math.floor(q2))

# --- rk4 order check numbers ---
for hh in (0.02, 0.01):
    n = round(1.0/hh)
    R = 1 - hh + hh**2/2 - hh**3/6 + hh**4/24
    err = abs(R**n - math.exp(-1.0))
    print("rk4 global err h=%g:" % hh, repr(err))
