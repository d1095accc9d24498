import os
import shutil

os.chdir(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
alvos = [
    'resultados',
    'logs',
    '.pytest_cache',
    '.hypothesis',
    'src/__pycache__',
    'src/modelos/__pycache__',
    'src/experimentos/__pycache__',
    'src/reports/__pycache__',
    'tests/__pycache__',
]

print("🧹 Limpando artefatos gerados...")

for alvo in alvos:
    if os.path.exists(alvo):
        try:
            shutil.rmtree(alvo)
            print(f"  ✅ Removido: {alvo}")
        except Exception as e:
            print(f"  ⚠️  Erro ao remover {alvo}: {e}")
    else:
        print(f"  ℹ️  Não existe: {alvo}")

print("\n✅ Limpeza concluída!")
print("\n🚀 Agora execute:")
print("   python run_all.py")
