import numpy as np, proto_all as P
means=[]
for ntest in [250,500,1000,2000]:
    regs=[P.cb2_regret(np.array([100/np.sqrt(2)]*2), np.array([1.0,1.0]), ntest, 0.2,
                       np.random.default_rng(1000+s)) for s in range(15)]
    means.append(np.mean(regs))
ln=np.log([250,500,1000,2000]); lr=np.log(means)
print(f'delta=0.2 ||th||=100 means={[round(m,1) for m in means]} slope={np.polyfit(ln,lr,1)[0]:.3f}')
