// expect: race
#include <pthread.h>
pthread_mutex_t m;
int g;
void *worker(void *p) {
  g = 3;
  return NULL;
}
int main() {
  pthread_t t;
  pthread_create(&t, NULL, worker, NULL);
  pthread_mutex_lock(&m);
  g = 4;
  pthread_mutex_unlock(&m);
  return 0;
}
