// expect: race_free
// allow: unknown
// The lock-guarded update in main always restores g, so line 9 is dead.
pthread_mutex_t L;
int g = 1;
void *thread(void *a) {
  lock(&L);
  if (g == 1) { unlock(&L); return NULL; }
  unlock(&L);
  g = 2;
  return NULL;
}
int main() {
  create(thread);
  lock(&L); g = 0; g = 1; unlock(&L);
  return 0;
}
